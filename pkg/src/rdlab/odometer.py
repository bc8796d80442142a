"""Finite stages ``C_n(Z_S)`` of the odometer algebra.

An :class:`OdometerElement` of stage ``m`` is a function on ``Z/s_m`` kept in
two coherent forms: its values ``f(0..s_m-1)`` and its Fourier coefficients
``fhat[j]`` against the characters ``z_j = e^{2 pi i j / s_m}``, related by
``f(x) = sum_j fhat[j] z_j**x``.
"""
from __future__ import annotations

from typing import Mapping

import numpy as np

from .numerics import dft_cyclic
from .rdcore.contract import ContractViolation, FilteredAlgebra
from .scales import Character, LengthSequence, SupernaturalScale, canonicalize

__all__ = [
    "OdometerElement",
    "OdometerAlgebra",
    "from_values",
    "from_coeffs",
    "character",
    "shift_alpha",
    "flip_kappa",
    "expectation",
    "expectation_average",
    "expectation_restrict",
    "convolution_product",
    "sup_norm",
    "star_norm",
    "exp_self_adjoint",
    "to_records",
    "from_records",
]

AGREE_TOL = 1e-12


class OdometerElement:
    __slots__ = ("scale", "stage", "values", "_coeffs")

    def __init__(self, scale: SupernaturalScale, stage: int, values, coeffs=None):
        scale.check_stage(stage)
        values = np.asarray(values, dtype=complex)
        if values.shape != (scale[stage],):
            raise ValueError(f"stage {stage} needs {scale[stage]} values, got shape {values.shape}")
        values.setflags(write=False)
        if coeffs is None:
            coeffs = dft_cyclic(values, forward=True)
        coeffs = np.asarray(coeffs, dtype=complex)
        coeffs.setflags(write=False)
        self.scale = scale
        self.stage = stage
        self.values = values
        self._coeffs = coeffs

    @property
    def coeff_array(self) -> np.ndarray:
        """Dense ``fhat[j]``, ``j = 0..s_m-1``."""
        return self._coeffs

    @property
    def coeffs(self) -> dict[Character, complex]:
        """Nonzero coefficients keyed by canonical character."""
        cut = 1e-14 * max(1.0, float(np.max(np.abs(self._coeffs), initial=0.0)))
        return {canonicalize(int(j), self.stage, self.scale): complex(self._coeffs[j])
                for j in np.flatnonzero(np.abs(self._coeffs) > cut)}

    def __repr__(self):
        return f"OdometerElement(stage={self.stage}, values={np.round(self.values, 6).tolist()})"

    def embed(self, m: int) -> OdometerElement:
        if m < self.stage:
            raise ValueError(f"cannot embed stage {self.stage} into lower stage {m}")
        if m == self.stage:
            return self
        r = self.scale[m] // self.scale[self.stage]
        coeffs = np.zeros(self.scale[m], dtype=complex)
        coeffs[::r] = self._coeffs
        return OdometerElement(self.scale, m, np.tile(self.values, r), coeffs)

    def _pair(self, other: OdometerElement):
        if other.scale != self.scale:
            raise ValueError("elements live on different scales")
        m = max(self.stage, other.stage)
        return self.embed(m), other.embed(m), m

    def __add__(self, other):
        a, b, m = self._pair(other)
        return OdometerElement(self.scale, m, a.values + b.values, a._coeffs + b._coeffs)

    def __sub__(self, other):
        a, b, m = self._pair(other)
        return OdometerElement(self.scale, m, a.values - b.values, a._coeffs - b._coeffs)

    def __neg__(self):
        return OdometerElement(self.scale, self.stage, -self.values, -self._coeffs)

    def __mul__(self, other):
        if isinstance(other, OdometerElement):
            a, b, m = self._pair(other)
            return OdometerElement(self.scale, m, a.values * b.values)
        return OdometerElement(self.scale, self.stage, self.values * other, self._coeffs * other)

    def __rmul__(self, c):
        return OdometerElement(self.scale, self.stage, self.values * c, self._coeffs * c)

    def adjoint(self) -> OdometerElement:
        return OdometerElement(self.scale, self.stage, self.values.conj())

    def conj(self) -> OdometerElement:
        return self.adjoint()

    def is_real(self, tol: float = 1e-10) -> bool:
        return float(np.max(np.abs(self.values.imag), initial=0.0)) <= tol


def from_values(values, m: int, scale: SupernaturalScale) -> OdometerElement:
    return OdometerElement(scale, m, values)


def from_coeffs(coeffs: Mapping[Character, complex] | np.ndarray, m: int, scale: SupernaturalScale) -> OdometerElement:
    """Build from a dense coefficient array at stage ``m`` or a ``Character -> complex`` map."""
    scale.check_stage(m)
    if isinstance(coeffs, Mapping):
        dense = np.zeros(scale[m], dtype=complex)
        for z, c in coeffs.items():
            if z.level > m:
                raise ValueError(f"{z} lies outside G_{m}")
            dense[z.index_at(m, scale)] += c
    else:
        dense = np.asarray(coeffs, dtype=complex)
    return OdometerElement(scale, m, dft_cyclic(dense, forward=False), dense)


def character(z: Character, m: int, scale: SupernaturalScale) -> OdometerElement:
    """``chi_z(x) = z**x`` as an element of stage ``m``."""
    return from_coeffs({z: 1.0}, m, scale)


def shift_alpha(f: OdometerElement, k: int = 1) -> OdometerElement:
    """``(alpha**k f)(x) = f(x + k)``; multiplies ``fhat_z`` by ``z**k``."""
    s = f.scale[f.stage]
    j = np.arange(s)
    phase = np.exp(2j * np.pi * ((j * k) % s) / s)
    return OdometerElement(f.scale, f.stage, np.roll(f.values, -k), f.coeff_array * phase)


def flip_kappa(f: OdometerElement) -> OdometerElement:
    """``(kappa f)(x) = f(-x)``; sends ``fhat_z`` to ``fhat_{1/z}``."""
    s = f.scale[f.stage]
    idx = (-np.arange(s)) % s
    return OdometerElement(f.scale, f.stage, f.values[idx], f.coeff_array[idx])


def expectation_average(f: OdometerElement, n: int) -> OdometerElement:
    """Iterate single-step shift averages ``(s_k/s_{k+1}) sum_j alpha**(j s_k)`` down to stage ``n``."""
    if n > f.stage:
        raise ValueError(f"cannot project stage {f.stage} onto higher stage {n}")
    g = f
    for k in range(f.stage - 1, n - 1, -1):
        sk, r = f.scale[k], f.scale.ratio(k)
        acc = np.zeros_like(g.values)
        for j in range(r):
            acc = acc + shift_alpha(g, j * sk).values
        # the average is s_k-periodic, keep one period
        g = OdometerElement(f.scale, k, acc[:sk] / r)
    return g


def expectation_restrict(f: OdometerElement, n: int) -> OdometerElement:
    """Keep the Fourier coefficients of characters in ``G_n``."""
    if n > f.stage:
        raise ValueError(f"cannot project stage {f.stage} onto higher stage {n}")
    r = f.scale[f.stage] // f.scale[n]
    # z_j lies in G_n exactly when r divides j
    return from_coeffs(f.coeff_array[::r], n, f.scale)


def expectation(f: OdometerElement, n: int, check: bool = True) -> OdometerElement:
    """``E_{m,n}(f)`` at stage ``n``; both implementations must agree to 1e-12."""
    g = expectation_restrict(f, n)
    if check:
        h = expectation_average(f, n)
        gap = float(np.max(np.abs(g.values - h.values), initial=0.0))
        if gap > AGREE_TOL * max(1.0, sup_norm(f)):
            raise ContractViolation(f"odometer expectation paths disagree by {gap:.3e}")
    return g


def convolution_product(f: OdometerElement, g: OdometerElement) -> OdometerElement:
    """Product computed on the coefficient side: ``(fg)^_w = sum_z fhat_z ghat_{w/z}``."""
    a, b, m = f._pair(g)
    s = f.scale[m]
    j = np.arange(s)
    out = np.zeros(s, dtype=complex)
    for w in range(s):
        out[w] = np.sum(a.coeff_array * b.coeff_array[(w - j) % s])
    return from_coeffs(out, m, f.scale)


def sup_norm(f: OdometerElement) -> float:
    return float(np.max(np.abs(f.values), initial=0.0))


def star_norm(f: OdometerElement, N: float, L: LengthSequence) -> float:
    """``sum_z |fhat_z| lam(z)**N`` with ``lam(z) = L[level(z)]``."""
    lev = f.scale.levels(f.stage)
    w = np.asarray(L.lam)[lev] ** N
    return float(np.sum(np.abs(f.coeff_array) * w))


def exp_self_adjoint(f: OdometerElement, t: float, tol: float = 1e-10) -> OdometerElement:
    if not f.is_real(tol):
        raise ValueError("exp_self_adjoint needs real values")
    return OdometerElement(f.scale, f.stage, np.exp(1j * t * f.values.real))


def to_records(f: OdometerElement) -> list[list]:
    """``[level, num, re, im]`` per nonzero coefficient."""
    return [[z.level, z.num, c.real, c.imag] for z, c in sorted(f.coeffs.items())]


def from_records(records, scale: SupernaturalScale, stage: int | None = None) -> OdometerElement:
    coeffs: dict[Character, complex] = {}
    for level, num, re, im in records:
        z = canonicalize(int(num), int(level), scale)
        coeffs[z] = coeffs.get(z, 0.0) + complex(re, im)
    top = max((z.level for z in coeffs), default=0)
    return from_coeffs(coeffs, top if stage is None else stage, scale)


def random_element(scale: SupernaturalScale, m: int, rng: np.random.Generator,
                   lengths: LengthSequence | None = None) -> OdometerElement:
    s = scale[m]
    c = rng.standard_normal(s) + 1j * rng.standard_normal(s)
    if lengths is not None:
        c = c / np.asarray(lengths.lam)[scale.levels(m)] ** 2
    return from_coeffs(c, m, scale)


class OdometerAlgebra(FilteredAlgebra):
    name = "odometer"
    omega = 1.0

    def __init__(self, scale: SupernaturalScale, stage: int | None = None):
        super().__init__(scale, scale.M if stage is None else stage)

    def unit(self) -> OdometerElement:
        return from_values(np.ones(self.scale[self.stage]), self.stage, self.scale)

    def zero(self) -> OdometerElement:
        return from_values(np.zeros(self.scale[self.stage]), self.stage, self.scale)

    def coerce(self, a: OdometerElement) -> OdometerElement:
        return a.embed(self.stage)

    def expectation(self, a: OdometerElement, n: int) -> OdometerElement:
        return expectation(self.coerce(a), n, check=False).embed(self.stage)

    def norm(self, a: OdometerElement) -> float:
        return sup_norm(a)

    def exp_i(self, a: OdometerElement, t: float) -> OdometerElement:
        return exp_self_adjoint(self.coerce(a), t)

    def random(self, rng, self_adjoint=False, lengths=None) -> OdometerElement:
        f = random_element(self.scale, self.stage, rng, lengths)
        if self_adjoint:
            f = OdometerElement(self.scale, self.stage, f.values.real.astype(complex))
        return f
