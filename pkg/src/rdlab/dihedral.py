"""Finite stages ``A_n = {f + v g}`` of the super dihedral algebra.

Relations: ``v* = v``, ``v**2 = 1``, ``v f v = kappa(f)`` with
``kappa(f)(x) = f(-x)``.  Norms are evaluated in the two-copy covariant
representation

    f + v g  ->  [[M_f, M_kappa(g)], [M_g, M_kappa(f)]]

on ``l2(Z/s_n) (+) l2(Z/s_n)``, which is faithful for the finite crossed
product ``C(Z/s_n) x| Z/2`` (the flip has fixed points, so a single copy is not).
"""
from __future__ import annotations

import numpy as np

from . import odometer as odo
from .numerics import exp_i_hermitian, spectral_norm, spectral_norms
from .odometer import OdometerElement, flip_kappa
from .rdcore.contract import FilteredAlgebra
from .scales import LengthSequence, SupernaturalScale

__all__ = ["SDElement", "DihedralAlgebra", "gamma", "represent", "from_matrix", "expectation", "hash_norm",
           "exp_self_adjoint", "v_element", "function_element", "to_records", "from_records"]

EXTRACT_TOL = 1e-9


class SDElement:
    __slots__ = ("f", "g")

    def __init__(self, f: OdometerElement, g: OdometerElement):
        m = max(f.stage, g.stage)
        self.f = f.embed(m)
        self.g = g.embed(m)

    @property
    def stage(self) -> int:
        return self.f.stage

    @property
    def scale(self) -> SupernaturalScale:
        return self.f.scale

    def __repr__(self):
        return f"SDElement(stage={self.stage}, f={np.round(self.f.values, 6).tolist()}, g={np.round(self.g.values, 6).tolist()})"

    def embed(self, m: int) -> SDElement:
        return SDElement(self.f.embed(m), self.g.embed(m))

    def __add__(self, other: SDElement):
        return SDElement(self.f + other.f, self.g + other.g)

    def __sub__(self, other: SDElement):
        return SDElement(self.f - other.f, self.g - other.g)

    def __neg__(self):
        return SDElement(-self.f, -self.g)

    def __mul__(self, other):
        if isinstance(other, SDElement):
            f1, g1, f2, g2 = self.f, self.g, other.f, other.g
            return SDElement(f1 * f2 + flip_kappa(g1) * g2, g1 * f2 + flip_kappa(f1) * g2)
        return SDElement(self.f * other, self.g * other)

    def __rmul__(self, c):
        return SDElement(c * self.f, c * self.g)

    def adjoint(self) -> SDElement:
        return SDElement(self.f.conj(), flip_kappa(self.g.conj()))

    def is_self_adjoint(self, tol: float = 1e-10) -> bool:
        d1 = np.max(np.abs(self.f.values.imag), initial=0.0)
        d2 = np.max(np.abs(self.g.values - flip_kappa(self.g.conj()).values), initial=0.0)
        return max(d1, d2) <= tol


def function_element(f: OdometerElement) -> SDElement:
    return SDElement(f, 0 * f)


def v_element(scale: SupernaturalScale, m: int = 0) -> SDElement:
    one = odo.from_values(np.ones(scale[m]), m, scale)
    return SDElement(0 * one, one)


def gamma(a: SDElement) -> SDElement:
    """Automorphism fixing functions and sending ``v`` to ``-v``."""
    return SDElement(a.f, -a.g)


def represent(a: SDElement) -> np.ndarray:
    """Matrix of size ``2 s_n`` in the covariant two-copy representation."""
    kf, kg = flip_kappa(a.f), flip_kappa(a.g)
    return np.block([[np.diag(a.f.values), np.diag(kg.values)],
                     [np.diag(a.g.values), np.diag(kf.values)]])


def from_matrix(X: np.ndarray, scale: SupernaturalScale, m: int, tol: float = EXTRACT_TOL) -> SDElement:
    """Read ``(f, g)`` off the diagonals of the left blocks and check the block form."""
    s = scale[m]
    f = odo.from_values(np.diag(X[:s, :s]).copy(), m, scale)
    g = odo.from_values(np.diag(X[s:, :s]).copy(), m, scale)
    a = SDElement(f, g)
    resid = float(np.max(np.abs(represent(a) - X), initial=0.0))
    if resid > tol * max(1.0, float(np.max(np.abs(X), initial=0.0))):
        raise ValueError(f"matrix is not in the image of the representation (residual {resid:.3e})")
    return a


def cstar_norm(a: SDElement) -> float:
    return spectral_norm(represent(a))


def expectation(a: SDElement, n: int) -> SDElement:
    """``E_{m,n}(f + v g) = E(f) + v E(g)`` with the odometer expectation, at stage ``n``."""
    return SDElement(odo.expectation(a.f, n, check=False), odo.expectation(a.g, n, check=False))


def hash_norm(a: SDElement, N: float, L: LengthSequence) -> float:
    """``||f||*_N + ||g||*_N``."""
    return odo.star_norm(a.f, N, L) + odo.star_norm(a.g, N, L)


def exp_self_adjoint(a: SDElement, t: float) -> SDElement:
    if not a.is_self_adjoint():
        raise ValueError("exp_self_adjoint needs f real and g = kappa(conj g)")
    return from_matrix(exp_i_hermitian(represent(a), t), a.scale, a.stage)


def to_records(a: SDElement) -> dict:
    return {"f": odo.to_records(a.f), "g": odo.to_records(a.g)}


def from_records(rec: dict, scale: SupernaturalScale, stage: int | None = None) -> SDElement:
    f = odo.from_records(rec.get("f", []), scale, stage)
    g = odo.from_records(rec.get("g", []), scale, stage)
    return SDElement(f, g)


class DihedralAlgebra(FilteredAlgebra):
    name = "dihedral"
    omega = 2.0

    def __init__(self, scale: SupernaturalScale, stage: int | None = None):
        super().__init__(scale, scale.M if stage is None else stage)

    def unit(self) -> SDElement:
        one = odo.from_values(np.ones(self.scale[self.stage]), self.stage, self.scale)
        return function_element(one)

    def zero(self) -> SDElement:
        return 0 * self.unit()

    def coerce(self, a: SDElement) -> SDElement:
        return a.embed(self.stage)

    def expectation(self, a: SDElement, n: int) -> SDElement:
        return expectation(self.coerce(a), n).embed(self.stage)

    def norm(self, a: SDElement) -> float:
        return cstar_norm(a)

    def norms(self, elements) -> list[float]:
        if not elements:
            return []
        stack = np.stack([represent(self.coerce(x)) for x in elements])
        return [float(v) for v in spectral_norms(stack)]

    def exp_i(self, a: SDElement, t: float) -> SDElement:
        return exp_self_adjoint(self.coerce(a), t)

    def is_self_adjoint(self, a, tol=1e-10) -> bool:
        return a.is_self_adjoint(tol)

    def random(self, rng, self_adjoint=False, lengths=None) -> SDElement:
        a = SDElement(odo.random_element(self.scale, self.stage, rng, lengths),
                      odo.random_element(self.scale, self.stage, rng, lengths))
        if self_adjoint:
            a = 0.5 * (a + a.adjoint())
        return a
