"""UHF(S) at finite stage: ``A_n ≅ M_{s_n}(C)`` spanned by matrix units ``P_(n,x,y)``.

An element of stage ``n`` is its ``s_n x s_n`` coefficient matrix.  The
inclusion ``A_n ⊂ A_m`` replicates the matrix ``s_m/s_n`` times down the
diagonal, and ``E_n`` keeps the top-left ``s_n x s_n`` corner.

The block decomposition ``a = sum_n a_n`` writes ``a_n`` in stage-``n`` matrix
units supported on the shell ``S_n`` (pairs with ``x`` or ``y`` in
``[s_{n-1}, s_n)``).  Collecting those coefficients for every ``n`` gives one
``s_m x s_m`` array, the *shell coefficient array*.
"""
from __future__ import annotations

import numpy as np

from .numerics import exp_i_hermitian, spectral_norm, spectral_norms
from .rdcore.contract import FilteredAlgebra
from .scales import LengthSequence, SupernaturalScale

__all__ = ["UHFElement", "UHFAlgebra", "matrix_unit", "identity", "embed", "window_rep", "window_interior",
           "expectation", "shell_indices", "shell_level_map", "shell_mask", "shell_coefficients",
           "percent_norm", "exp_self_adjoint", "trace_state", "to_records", "from_records"]


class UHFElement:
    __slots__ = ("scale", "stage", "matrix")

    def __init__(self, scale: SupernaturalScale, stage: int, matrix):
        scale.check_stage(stage)
        matrix = np.asarray(matrix, dtype=complex)
        s = scale[stage]
        if matrix.shape != (s, s):
            raise ValueError(f"stage {stage} needs a {s}x{s} matrix, got {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("non-finite matrix entries")
        matrix.setflags(write=False)
        self.scale = scale
        self.stage = stage
        self.matrix = matrix

    def __repr__(self):
        return f"UHFElement(stage={self.stage}, shape={self.matrix.shape})"

    def embed(self, m: int) -> UHFElement:
        return embed(self, m)

    def _pair(self, other: UHFElement):
        m = max(self.stage, other.stage)
        return self.embed(m).matrix, other.embed(m).matrix, m

    def __add__(self, other):
        a, b, m = self._pair(other)
        return UHFElement(self.scale, m, a + b)

    def __sub__(self, other):
        a, b, m = self._pair(other)
        return UHFElement(self.scale, m, a - b)

    def __neg__(self):
        return UHFElement(self.scale, self.stage, -self.matrix)

    def __mul__(self, other):
        if isinstance(other, UHFElement):
            a, b, m = self._pair(other)
            return UHFElement(self.scale, m, a @ b)
        return UHFElement(self.scale, self.stage, self.matrix * other)

    def __rmul__(self, c):
        return UHFElement(self.scale, self.stage, c * self.matrix)

    def adjoint(self) -> UHFElement:
        return UHFElement(self.scale, self.stage, self.matrix.conj().T)


def matrix_unit(n: int, x: int, y: int, scale: SupernaturalScale) -> UHFElement:
    s = scale[n]
    if not (0 <= x < s and 0 <= y < s):
        raise ValueError(f"matrix unit indices ({x}, {y}) outside 0..{s - 1}")
    P = np.zeros((s, s), dtype=complex)
    P[x, y] = 1.0
    return UHFElement(scale, n, P)


def identity(n: int, scale: SupernaturalScale) -> UHFElement:
    return UHFElement(scale, n, np.eye(scale[n]))


def embed(a: UHFElement, m: int) -> UHFElement:
    if m < a.stage:
        raise ValueError(f"cannot embed stage {a.stage} into lower stage {m}")
    if m == a.stage:
        return a
    r = a.scale[m] // a.scale[a.stage]
    return UHFElement(a.scale, m, np.kron(np.eye(r), a.matrix))


def window_rep(n: int, x: int, y: int, W: int, scale: SupernaturalScale) -> np.ndarray:
    """``P_(n,x,y)`` on ``span{E_-W..E_W}``: ``E_k -> E_{k+x-y}`` when ``s_n | (k-y)``."""
    s = scale[n]
    if W < s:
        raise ValueError("window half-width must be at least s_n")
    size = 2 * W + 1
    out = np.zeros((size, size))
    for k in range(-W, W + 1):
        if (k - y) % s == 0:
            row = k + x - y
            if -W <= row <= W:
                out[row + W, k + W] = 1.0
    return out


def window_interior(n: int, W: int, scale: SupernaturalScale) -> slice:
    """Indices ``|k| <= W - s_n`` where truncation cannot affect a product of two units."""
    s = scale[n]
    return slice(s, 2 * W + 1 - s)


def expectation(a: UHFElement, n: int) -> UHFElement:
    """``E_{m,n}``: the top-left ``s_n x s_n`` corner, read at stage ``n``."""
    if n > a.stage:
        raise ValueError(f"cannot project stage {a.stage} onto higher stage {n}")
    s = a.scale[n]
    return UHFElement(a.scale, n, a.matrix[:s, :s].copy())


def shell_level_map(m: int, scale: SupernaturalScale) -> np.ndarray:
    """``L[x, y] = n`` for ``(x, y)`` in shell ``S_n``, over ``0 <= x, y < s_m``."""
    s = scale[m]
    lev = np.searchsorted(np.asarray(scale.s[: m + 1]), np.arange(s), side="right")
    return np.maximum.outer(lev, lev)


def shell_indices(n: int, m: int, scale: SupernaturalScale) -> np.ndarray:
    """Boolean mask of ``S_n`` inside the ``s_m x s_m`` index square."""
    return shell_level_map(m, scale) == n


def shell_mask(a: UHFElement, n: int) -> UHFElement:
    """Block component ``a_n`` in stage-``n`` matrix units (supported on ``S_n``)."""
    if n > a.stage:
        raise ValueError(f"shell {n} above the element's stage {a.stage}")
    top = expectation(a, n).matrix
    if n == 0:
        return UHFElement(a.scale, 0, top)
    prev = embed(expectation(a, n - 1), n).matrix
    return UHFElement(a.scale, n, top - prev)


def shell_coefficients(a: UHFElement) -> np.ndarray:
    """The shell coefficient array: entry ``(x, y)`` in ``S_n`` multiplies ``P_(n,x,y)``."""
    m = a.stage
    out = np.zeros_like(a.matrix)
    levels = shell_level_map(m, a.scale)
    for n in range(m + 1):
        s = a.scale[n]
        blk = shell_mask(a, n).matrix
        mask = levels[:s, :s] == n
        out[:s, :s][mask] = blk[mask]
    return out


def from_shell_coefficients(C: np.ndarray, m: int, scale: SupernaturalScale) -> UHFElement:
    """Inverse of :func:`shell_coefficients`."""
    levels = shell_level_map(m, scale)
    total = UHFElement(scale, m, np.zeros((scale[m], scale[m])))
    for n in range(m + 1):
        s = scale[n]
        blk = np.where(levels[:s, :s] == n, C[:s, :s], 0)
        total = total + UHFElement(scale, n, blk)
    return total


def percent_norm(a: UHFElement, N: float, L: LengthSequence) -> float:
    """``sum_n sum_{(x,y) in S_n} |a_(x,y)| lam_n**N`` over the shell coefficient array."""
    C = shell_coefficients(a)
    w = np.asarray(L.lam)[shell_level_map(a.stage, a.scale)] ** N
    return float(np.sum(np.abs(C) * w))


def cstar_norm(a: UHFElement) -> float:
    return spectral_norm(a.matrix)


def exp_self_adjoint(a: UHFElement, t: float) -> UHFElement:
    return UHFElement(a.scale, a.stage, exp_i_hermitian(a.matrix, t))


def trace_state(a: UHFElement) -> complex:
    return complex(np.trace(a.matrix)) / a.scale[a.stage]


def to_records(a: UHFElement) -> dict:
    flat = a.matrix.ravel()
    return {"stage": a.stage, "matrix": [[v.real, v.imag] for v in flat]}


def from_records(rec: dict, scale: SupernaturalScale) -> UHFElement:
    m = int(rec["stage"])
    s = scale[m]
    vals = np.array([complex(re, im) for re, im in rec["matrix"]])
    return UHFElement(scale, m, vals.reshape(s, s))


class UHFAlgebra(FilteredAlgebra):
    name = "uhf"
    omega = 1.0

    def __init__(self, scale: SupernaturalScale, stage: int | None = None):
        super().__init__(scale, scale.M if stage is None else stage)

    def unit(self) -> UHFElement:
        return identity(self.stage, self.scale)

    def zero(self) -> UHFElement:
        return 0 * self.unit()

    def coerce(self, a: UHFElement) -> UHFElement:
        return embed(a, self.stage)

    def expectation(self, a: UHFElement, n: int) -> UHFElement:
        return embed(expectation(self.coerce(a), n), self.stage)

    def norm(self, a: UHFElement) -> float:
        return cstar_norm(a)

    def norms(self, elements) -> list[float]:
        if not elements:
            return []
        stack = np.stack([self.coerce(x).matrix for x in elements])
        return [float(v) for v in spectral_norms(stack)]

    def exp_i(self, a: UHFElement, t: float) -> UHFElement:
        return exp_self_adjoint(self.coerce(a), t)

    def random(self, rng, self_adjoint=False, lengths=None) -> UHFElement:
        s = self.scale[self.stage]
        X = rng.standard_normal((s, s)) + 1j * rng.standard_normal((s, s))
        if lengths is not None:
            X = X / np.asarray(lengths.lam)[shell_level_map(self.stage, self.scale)] ** 2
        a = UHFElement(self.scale, self.stage, X)
        if self_adjoint:
            a = 0.5 * (a + a.adjoint())
        return a
