"""Finite stages of the Bunce-Deddens algebra acting on ``l2(Z)``.

Operators: the bilateral shift ``U E_l = E_{l+1}`` and multiplications
``M_f E_l = f(l) E_l`` by ``s_n``-periodic functions.  A stage-``n`` element
is ``sum_j ahat_j(U) M_{chi_j}`` with ``chi_j(l) = w**(j l)``,
``w = exp(2 pi i / s_n)``, and Laurent polynomials ``ahat_j``.  It is stored
densely as ``C[j, k + K]``, the coefficient of ``U**k M_{chi_j}``.

With these operators ``M_{chi_j} U**k = w**(j k) U**k M_{chi_j}``, so

    (U**k1 M_{chi_j1}) (U**k2 M_{chi_j2}) = w**(j1 k2) U**(k1+k2) M_{chi_(j1+j2)}.

Norms use the Bloch decomposition.  An ``s``-periodic operator is the direct
integral over ``theta`` of ``s x s`` matrices in which ``U`` becomes the cyclic
shift with ``e^{i theta}`` on the wrap entry and ``M_{chi_j}`` becomes
``diag(w**(j r))``.  Its norm is the supremum over ``theta`` of the fibre
norms.  A window compression onto ``span{E_-W..E_W}`` gives a certified lower
bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .numerics import CircleGrid, circle_sup, exp_i_hermitian, hermitian_defect, spectral_norm, spectral_norms
from .odometer import OdometerElement
from .rdcore.contract import ContractViolation, FilteredAlgebra
from .scales import Character, LengthSequence, SupernaturalScale, canonicalize

__all__ = [
    "BDElement", "BlochElement", "BDAlgebra", "monomial", "shift_element", "multiplication_element",
    "from_terms", "expectation", "expectation_restrict", "expectation_average", "extract_coefficient",
    "delta_L", "bloch_matrix", "bloch_element", "bloch_coefficients", "bloch_expectation", "window_rep",
    "window_lower_bound", "cstar_norm", "coefficient_sups", "norm_0N", "norm_MN", "bloch_norm_0N",
    "exp_self_adjoint", "exp_with_derivative", "default_grid", "to_records", "from_records",
]

AGREE_TOL = 1e-12
EXPAND_TOL = 1e-8


def _roots(s: int, exps) -> np.ndarray:
    """``exp(2 pi i e / s)`` with the exponent reduced mod ``s`` in integers first."""
    return np.exp(2j * np.pi * (np.asarray(exps, dtype=np.int64) % s) / s)


class BDElement:
    """``sum_{j,k} C[j, k+K] U**k M_{chi_j}`` at stage ``stage``."""

    __slots__ = ("scale", "stage", "coeffs")

    def __init__(self, scale: SupernaturalScale, stage: int, coeffs):
        scale.check_stage(stage)
        C = np.asarray(coeffs, dtype=complex)
        if C.ndim != 2 or C.shape[0] != scale[stage] or C.shape[1] % 2 != 1:
            raise ValueError(f"stage {stage} needs coefficients of shape ({scale[stage]}, 2K+1), got {C.shape}")
        if not np.all(np.isfinite(C)):
            raise ValueError("non-finite coefficients")
        C.setflags(write=False)
        self.scale = scale
        self.stage = stage
        self.coeffs = C

    @property
    def K(self) -> int:
        """Half-width of the stored Laurent range."""
        return (self.coeffs.shape[1] - 1) // 2

    @property
    def degree(self) -> int:
        cols = np.flatnonzero(np.any(self.coeffs != 0, axis=0))
        return int(np.max(np.abs(cols - self.K))) if cols.size else 0

    def __repr__(self):
        return f"BDElement(stage={self.stage}, K={self.K}, terms={len(self.terms())})"

    def terms(self) -> dict[Character, dict[int, complex]]:
        out: dict[Character, dict[int, complex]] = {}
        for j, col in zip(*np.nonzero(self.coeffs)):
            z = canonicalize(int(j), self.stage, self.scale)
            out.setdefault(z, {})[int(col) - self.K] = complex(self.coeffs[j, col])
        return out

    def coefficient(self, w: Character) -> dict[int, complex]:
        """Stored Laurent coefficients of ``ahat_w``."""
        if w.level > self.stage:
            raise ValueError(f"{w} lies outside G_{self.stage}")
        row = self.coeffs[w.index_at(self.stage, self.scale)]
        return {k - self.K: complex(c) for k, c in enumerate(row) if c != 0}

    def widen(self, K: int) -> BDElement:
        if K < self.K:
            raise ValueError("cannot narrow by widening")
        pad = K - self.K
        return BDElement(self.scale, self.stage, np.pad(self.coeffs, ((0, 0), (pad, pad))))

    def trim(self) -> BDElement:
        """Drop outer Laurent columns that are exactly zero."""
        d = self.degree
        return BDElement(self.scale, self.stage, self.coeffs[:, self.K - d: self.K + d + 1])

    def embed(self, m: int) -> BDElement:
        if m < self.stage:
            raise ValueError(f"cannot embed stage {self.stage} into lower stage {m}")
        if m == self.stage:
            return self
        r = self.scale[m] // self.scale[self.stage]
        C = np.zeros((self.scale[m], self.coeffs.shape[1]), dtype=complex)
        C[::r] = self.coeffs
        return BDElement(self.scale, m, C)

    def _pair(self, other: BDElement):
        m = max(self.stage, other.stage)
        K = max(self.K, other.K)
        return self.embed(m).widen(K).coeffs, other.embed(m).widen(K).coeffs, m

    def __add__(self, other):
        a, b, m = self._pair(other)
        return BDElement(self.scale, m, a + b)

    def __sub__(self, other):
        a, b, m = self._pair(other)
        return BDElement(self.scale, m, a - b)

    def __neg__(self):
        return BDElement(self.scale, self.stage, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, BDElement):
            return _product(self, other)
        return BDElement(self.scale, self.stage, self.coeffs * other)

    def __rmul__(self, c):
        return BDElement(self.scale, self.stage, c * self.coeffs)

    def adjoint(self) -> BDElement:
        # (c U^k M_j)* = conj(c) w^(jk) U^-k M_-j
        s, K = self.scale[self.stage], self.K
        j = np.arange(s)[:, None]
        k = np.arange(-K, K + 1)[None, :]
        D = self.coeffs.conj() * _roots(s, j * k)
        return BDElement(self.scale, self.stage, D[(-np.arange(s)) % s, ::-1])


def _product(a: BDElement, b: BDElement) -> BDElement:
    m = max(a.stage, b.stage)
    a, b = a.embed(m), b.embed(m)
    s = a.scale[m]
    w1, w2 = a.coeffs.shape[1], b.coeffs.shape[1]
    k2 = np.arange(w2) - b.K
    out = np.zeros((s, w1 + w2 - 1), dtype=complex)
    for j1 in range(s):
        row = a.coeffs[j1]
        nz = np.flatnonzero(row)
        if nz.size == 0:
            continue
        # row j2 of b lands on j1 + j2 with the phase w^(j1 k2)
        P = np.roll(b.coeffs * _roots(s, j1 * k2)[None, :], j1, axis=0)
        for c1 in nz:
            out[:, c1: c1 + w2] += row[c1] * P
    return BDElement(a.scale, m, out)


def from_terms(terms: Mapping[Character, Mapping[int, complex]], m: int, scale: SupernaturalScale,
               K: int | None = None) -> BDElement:
    """Build from ``{character: {k: coefficient}}``."""
    scale.check_stage(m)
    deg = max((abs(k) for t in terms.values() for k in t), default=0)
    K = deg if K is None else K
    if K < deg:
        raise ValueError(f"Laurent degree {deg} exceeds K = {K}")
    C = np.zeros((scale[m], 2 * K + 1), dtype=complex)
    for z, coeffs in terms.items():
        if z.level > m:
            raise ValueError(f"{z} lies outside G_{m}")
        j = z.index_at(m, scale)
        for k, c in coeffs.items():
            C[j, k + K] += c
    return BDElement(scale, m, C)


def monomial(k: int, z: Character, m: int, scale: SupernaturalScale, c: complex = 1.0) -> BDElement:
    """``c U**k M_{chi_z}``."""
    return from_terms({z: {k: c}}, m, scale)


def shift_element(scale: SupernaturalScale, k: int = 1, m: int = 0) -> BDElement:
    return monomial(k, Character(0, 0), m, scale)


def identity(scale: SupernaturalScale, m: int = 0) -> BDElement:
    return shift_element(scale, 0, m)


def multiplication_element(f: OdometerElement) -> BDElement:
    """``M_f`` for an ``s_n``-periodic function given as an odometer element."""
    return BDElement(f.scale, f.stage, f.coeff_array[:, None])


# ---------------------------------------------------------------- expectations


def expectation_restrict(a: BDElement, n: int) -> BDElement:
    """Keep the terms whose character lies in ``G_n``."""
    if n > a.stage:
        raise ValueError(f"cannot project stage {a.stage} onto higher stage {n}")
    r = a.scale[a.stage] // a.scale[n]
    return BDElement(a.scale, n, a.coeffs[::r].copy())


def _conjugation_average(a: BDElement, step: int, count: int) -> BDElement:
    """``(1/count) sum_{i<count} U**(i step) a U**(-i step)`` by operator products."""
    acc = 0 * a
    for i in range(count):
        p = i * step
        acc = acc + shift_element(a.scale, p) * a * shift_element(a.scale, -p)
    avg = (acc * (1.0 / count)).trim()
    return avg.widen(max(a.K, avg.K))


def expectation_average(a: BDElement, n: int, tol: float = AGREE_TOL) -> BDElement:
    """Iterate ``(s_k/s_{k+1}) sum_i U**(i s_k) a U**(-i s_k)`` down to stage ``n``."""
    if n > a.stage:
        raise ValueError(f"cannot project stage {a.stage} onto higher stage {n}")
    g = a
    for k in range(a.stage - 1, n - 1, -1):
        r = a.scale.ratio(k)
        avg = _conjugation_average(g, a.scale[k], r)
        # characters outside G_k must have cancelled
        rest = np.delete(avg.coeffs, np.s_[::r], axis=0)
        leak = float(np.max(np.abs(rest), initial=0.0))
        if leak > tol * max(1.0, float(np.max(np.abs(g.coeffs), initial=0.0))):
            raise ContractViolation(f"conjugation average left characters outside G_{k} ({leak:.3e})")
        g = BDElement(a.scale, k, avg.coeffs[::r].copy())
    return g


def expectation(a: BDElement, n: int, check: bool = True) -> BDElement:
    """``E_{m,n}(a)`` at stage ``n``; averaging and restriction must agree to 1e-12."""
    g = expectation_restrict(a, n)
    if check:
        h = expectation_average(a, n)
        K = max(g.K, h.K)
        gap = float(np.max(np.abs(g.widen(K).coeffs - h.widen(K).coeffs), initial=0.0))
        if gap > AGREE_TOL * max(1.0, float(np.max(np.abs(a.coeffs), initial=0.0))):
            raise ContractViolation(f"BD expectation paths disagree by {gap:.3e}")
    return g


def extract_coefficient(a: BDElement, w: Character) -> dict[int, complex]:
    """``ahat_w`` through ``(1/s_n) sum_j U**j (a M_{conj chi_w}) U**(-j)``."""
    if w.level > a.stage:
        raise ValueError(f"{w} lies outside G_{a.stage}")
    s = a.scale[a.stage]
    j = w.index_at(a.stage, a.scale)
    b = a * monomial(0, canonicalize((-j) % s, a.stage, a.scale), a.stage, a.scale)
    avg = _conjugation_average(b, 1, s)
    return {k - avg.K: complex(c) for k, c in enumerate(avg.coeffs[0]) if abs(c) > 0}


def delta_L(a: BDElement) -> BDElement:
    """The derivation with ``delta_L(U) = U`` and ``delta_L(M_f) = 0``."""
    k = np.arange(-a.K, a.K + 1)
    return BDElement(a.scale, a.stage, a.coeffs * k[None, :])


# ---------------------------------------------------------------- Bloch fibres


def default_grid(K: int, s: int) -> CircleGrid:
    """``64 (d+1)`` angles, ``d = ceil((K+s)/s)`` bounding the fibre-entry degree."""
    return CircleGrid.for_degree(math.ceil((K + s) / s))


def _shift_phase(thetas: np.ndarray, q: np.ndarray) -> np.ndarray:
    """``exp(i theta q)`` for integer ``q``, exponentiating each distinct ``q`` once."""
    uq, inv = np.unique(np.asarray(q), return_inverse=True)
    return np.exp(1j * np.multiply.outer(thetas, uq))[:, inv.reshape(np.shape(q))]


def bloch_matrix(a: BDElement, theta, stage: int | None = None) -> np.ndarray:
    """Fibre matrix (or stack of them for an array of angles) of size ``s_stage``."""
    m = a.stage if stage is None else stage
    a = a.embed(m)
    s = a.scale[m]
    thetas = np.atleast_1d(np.asarray(theta, dtype=float))
    # g[r, k] = sum_j C[j, k] w^(j r)
    g = np.fft.ifft(a.coeffs, axis=0) * s
    r = np.arange(s)
    X = np.zeros((thetas.size, s, s), dtype=complex)
    for col in range(a.coeffs.shape[1]):
        if not np.any(g[:, col]):
            continue
        k = col - a.K
        rows = (r + k) % s
        q = (r + k) // s
        X[:, rows, r] += g[:, col][None, :] * _shift_phase(thetas, q)
    return X[0] if np.ndim(theta) == 0 else X


def _diagonals(thetas: np.ndarray, s: int):
    """Index arrays of the wrapped diagonals ``(r+k) % s, r`` and their wrap phases, shaped ``(k, r)``."""
    r = np.arange(s)
    k = np.arange(s)
    rows = (r[None, :] + k[:, None]) % s
    q = (r[None, :] + k[:, None]) // s
    cols = np.broadcast_to(r[None, :], (s, s))
    return rows, cols, _shift_phase(thetas, q)


def bloch_coefficients(X: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Expand fibre matrices in ``{U_theta**k M_j : 0 <= j, k < s}``; returns ``c[g, j, k]``."""
    s = X.shape[-1]
    rows, cols, ph = _diagonals(thetas, s)
    d = X[:, rows, cols] * ph.conj()
    # d[g, k, r] = sum_j c[g, j, k] w^(j r)
    return np.swapaxes(np.fft.fft(d, axis=-1) / s, -1, -2)


def bloch_from_coefficients(c: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    s = c.shape[-1]
    rows, cols, ph = _diagonals(thetas, s)
    d = np.fft.ifft(np.swapaxes(c, -1, -2), axis=-1) * s * ph
    X = np.zeros(c.shape, dtype=complex)
    X[:, rows, cols] = d
    return X


def _shift_power(thetas: np.ndarray, s: int, p: int) -> np.ndarray:
    """``U_theta**p`` as a stack."""
    r = np.arange(s)
    out = np.zeros((thetas.size, s, s), dtype=complex)
    out[:, (r + p) % s, r] = _shift_phase(thetas, (r + p) // s)
    return out


@dataclass(frozen=True, eq=False)
class BlochElement:
    """Fibre samples ``X(theta_g)`` of an operator at stage ``stage``.

    Arithmetic is exact at every sample; only the norm (the maximum over the
    grid) is an estimate.
    """

    scale: SupernaturalScale
    stage: int
    thetas: np.ndarray
    mats: np.ndarray

    def __post_init__(self):
        s = self.scale[self.stage]
        if self.mats.shape != (self.thetas.size, s, s):
            raise ValueError(f"fibre stack has shape {self.mats.shape}, expected ({self.thetas.size}, {s}, {s})")

    def _check(self, other: BlochElement):
        if other.stage != self.stage or other.thetas.size != self.thetas.size:
            raise ValueError("Bloch samples live on different stages or grids")

    def __add__(self, other):
        self._check(other)
        return BlochElement(self.scale, self.stage, self.thetas, self.mats + other.mats)

    def __sub__(self, other):
        self._check(other)
        return BlochElement(self.scale, self.stage, self.thetas, self.mats - other.mats)

    def __neg__(self):
        return BlochElement(self.scale, self.stage, self.thetas, -self.mats)

    def __mul__(self, other):
        if isinstance(other, BlochElement):
            self._check(other)
            return BlochElement(self.scale, self.stage, self.thetas, self.mats @ other.mats)
        return BlochElement(self.scale, self.stage, self.thetas, self.mats * other)

    def __rmul__(self, c):
        return BlochElement(self.scale, self.stage, self.thetas, c * self.mats)

    def adjoint(self) -> BlochElement:
        return BlochElement(self.scale, self.stage, self.thetas, np.swapaxes(self.mats.conj(), -1, -2))

    def norm(self) -> float:
        return float(np.max(spectral_norms(self.mats)))

    def coefficients(self) -> np.ndarray:
        return bloch_coefficients(self.mats, self.thetas)


def bloch_element(a: BDElement, grid: CircleGrid | None = None, stage: int | None = None) -> BlochElement:
    m = a.stage if stage is None else stage
    grid = grid or default_grid(a.K, a.scale[m])
    return BlochElement(a.scale, m, grid.values, bloch_matrix(a, grid.values, m))


def bloch_expectation(x: BlochElement, n: int, method: str = "restrict") -> BlochElement:
    """``E_n`` on fibre samples, result kept at the sample stage.

    ``restrict`` drops characters outside ``G_n`` in the fibre basis;
    ``average`` conjugates by ``U_theta**(i s_k)`` one stage at a time.
    """
    if n > x.stage:
        raise ValueError(f"cannot project stage {x.stage} onto higher stage {n}")
    s = x.scale[x.stage]
    if method == "restrict":
        # keeping characters j = 0 mod s/s_n averages each diagonal d_k(r) over r mod s_n
        sn = x.scale[n]
        rows, cols, ph = _diagonals(x.thetas, s)
        d = x.mats[:, rows, cols] * ph.conj()
        G = d.shape[0]
        d = d.reshape(G, s, s // sn, sn).mean(axis=2, keepdims=True)
        d = np.broadcast_to(d, (G, s, s // sn, sn)).reshape(G, s, s)
        X = np.zeros_like(x.mats)
        X[:, rows, cols] = d * ph
        return BlochElement(x.scale, x.stage, x.thetas, X)
    if method == "average":
        X = x.mats
        for k in range(x.stage - 1, n - 1, -1):
            sk, r = x.scale[k], x.scale.ratio(k)
            acc = np.zeros_like(X)
            for i in range(r):
                P = _shift_power(x.thetas, s, i * sk)
                acc += P @ X @ np.swapaxes(P.conj(), -1, -2)
            X = acc / r
        return BlochElement(x.scale, x.stage, x.thetas, X)
    raise ValueError(f"unknown expectation method {method!r}")


def coefficient_sups(x: BlochElement) -> np.ndarray:
    """``max |ahat_j(u)|`` over ``u = exp(i (theta_g + 2 pi l) / s)``, one value per character ``j``."""
    s = x.scale[x.stage]
    c = x.coefficients()
    # ahat_j(omega_l) = sum_k c[j, k] omega_l^k with omega_l^k = e^{i k theta / s} w^(k l)
    tw = c * np.exp(1j * np.multiply.outer(x.thetas, np.arange(s)) / s)[:, None, :]
    vals = np.fft.ifft(tw, axis=-1) * s
    return np.max(np.abs(vals), axis=(0, 2))


def bloch_norm_0N(x: BlochElement, N: float, L: LengthSequence) -> float:
    lev = x.scale.levels(x.stage)
    return float(np.sum(coefficient_sups(x) * np.asarray(L.lam)[lev] ** N))


# ---------------------------------------------------------------- window oracle


def window_rep(a: BDElement, W: int) -> np.ndarray:
    """Compression of ``a`` to ``span{E_-W..E_W}`` (index ``l + W``)."""
    s = a.scale[a.stage]
    l = np.arange(-W, W + 1)
    g = np.fft.ifft(a.coeffs, axis=0) * s
    out = np.zeros((2 * W + 1, 2 * W + 1), dtype=complex)
    for col in range(a.coeffs.shape[1]):
        k = col - a.K
        vals = g[l % s, col]
        rows = l + k
        ok = (rows >= -W) & (rows <= W)
        out[rows[ok] + W, l[ok] + W] += vals[ok]
    return out


def default_window(a: BDElement) -> int:
    return 4 * (a.K + a.scale[a.stage])


def window_lower_bound(a: BDElement, W: int | None = None) -> float:
    """``||P_W a P_W||``, never above ``||a||``."""
    return spectral_norm(window_rep(a, default_window(a) if W is None else W))


def cstar_norm(a: BDElement, grid: CircleGrid | None = None, W: int | None = None) -> tuple[float, float]:
    """``(grid estimate, window lower bound)`` for the operator norm."""
    return bloch_element(a, grid).norm(), window_lower_bound(a, W)


# ---------------------------------------------------------------- norms


def norm_0N(a: BDElement, N: float, L: LengthSequence, grid: CircleGrid | None = None,
            envelope: bool = False) -> float:
    """``sum_z ||ahat_z||_sup lam(z)**N`` with grid-estimated sup norms.

    ``envelope=True`` uses the l1 coefficient envelope instead, an upper bound.
    """
    lev = a.scale.levels(a.stage)
    lam = np.asarray(L.lam)
    total = 0.0
    for j in np.flatnonzero(np.any(a.coeffs != 0, axis=1)):
        row = {k - a.K: c for k, c in enumerate(a.coeffs[j]) if c != 0}
        est, ub = circle_sup(row, grid or CircleGrid.for_degree(a.degree))
        total += (ub if envelope else est) * lam[lev[j]] ** N
    return float(total)


def norm_MN(a: BDElement, M: int, N: float, L: LengthSequence, grid: CircleGrid | None = None) -> float:
    """``sum_{j<=M} binom(M, j) ||delta_L**j a||_{0,N}``."""
    if M < 0 or N < 0:
        raise ValueError("norm indices must be non-negative")
    total, d = 0.0, a
    for j in range(M + 1):
        total += math.comb(M, j) * norm_0N(d, N, L, grid)
        d = delta_L(d)
    return total


# ---------------------------------------------------------------- exponentials


def _check_hermitian(a: BDElement) -> None:
    A = window_rep(a, default_window(a))
    defect = spectral_norm(A - A.conj().T)
    if defect > 1e-10 * max(1.0, spectral_norm(A)):
        raise ValueError(f"element is not self-adjoint (window defect {defect:.3e})")


def _expansion_check(x: BlochElement) -> None:
    back = bloch_from_coefficients(x.coefficients(), x.thetas)
    resid = float(np.max(np.abs(back - x.mats), initial=0.0))
    if resid > EXPAND_TOL:
        raise ContractViolation(f"fibre basis expansion residual {resid:.3e}")


def exp_self_adjoint(a: BDElement, t: float, grid: CircleGrid | None = None,
                     stage: int | None = None) -> BlochElement:
    """``exp(i t a)`` sampled on the grid (grid-approximate)."""
    _check_hermitian(a)
    x = bloch_element(a, grid, stage)
    out = BlochElement(a.scale, x.stage, x.thetas, exp_i_hermitian(x.mats, t))
    _expansion_check(out)
    return out


def _duhamel(X: np.ndarray, Y: np.ndarray, t: float) -> np.ndarray:
    """Derivative of ``exp(i t H)`` along ``Y``, by the divided-difference formula."""
    w, V = np.linalg.eigh(0.5 * (X + np.swapaxes(X.conj(), -1, -2)))
    e = np.exp(1j * t * w)
    dw = w[..., :, None] - w[..., None, :]
    de = e[..., :, None] - e[..., None, :]
    close = np.abs(dw) < 1e-12
    F = np.where(close, 1j * t * e[..., :, None], de / np.where(close, 1.0, dw))
    Vh = np.swapaxes(V.conj(), -1, -2)
    return V @ ((Vh @ Y @ V) * F) @ Vh


def exp_with_derivative(a: BDElement, t: float, grid: CircleGrid | None = None,
                        stage: int | None = None) -> tuple[BlochElement, BlochElement]:
    """``exp(i t a)`` and ``delta_L(exp(i t a))`` on the grid."""
    _check_hermitian(a)
    x = bloch_element(a, grid, stage)
    dx = bloch_matrix(delta_L(a), x.thetas, x.stage)
    E = BlochElement(a.scale, x.stage, x.thetas, exp_i_hermitian(x.mats, t))
    D = BlochElement(a.scale, x.stage, x.thetas, _duhamel(x.mats, dx, t))
    return E, D


# ---------------------------------------------------------------- serialization


def to_records(a: BDElement) -> list[dict]:
    out = []
    for z, coeffs in sorted(a.terms().items()):
        out.append({"level": z.level, "num": z.num,
                    "terms": [[k, c.real, c.imag] for k, c in sorted(coeffs.items())]})
    return out


def from_records(records, scale: SupernaturalScale, stage: int | None = None) -> BDElement:
    terms: dict[Character, dict[int, complex]] = {}
    for rec in records:
        z = canonicalize(int(rec["num"]), int(rec["level"]), scale)
        slot = terms.setdefault(z, {})
        for k, re, im in rec["terms"]:
            slot[int(k)] = slot.get(int(k), 0.0) + complex(re, im)
    top = max((z.level for z in terms), default=0)
    return from_terms(terms, top if stage is None else stage, scale)


def random_element(scale: SupernaturalScale, m: int, K: int, rng: np.random.Generator,
                   lengths: LengthSequence | None = None) -> BDElement:
    s = scale[m]
    C = rng.standard_normal((s, 2 * K + 1)) + 1j * rng.standard_normal((s, 2 * K + 1))
    if lengths is not None:
        C = C / (np.asarray(lengths.lam)[scale.levels(m)] ** 2)[:, None]
    return BDElement(scale, m, C)


# ---------------------------------------------------------------- algebra


class BDAlgebra(FilteredAlgebra):
    """Working representation: fibre samples at the working stage on a fixed grid.

    Laurent elements are converted on entry, so products, adjoints and
    expectations are exact at every sample and norms are grid maxima.
    """

    name = "bunce_deddens"
    omega = 1.0
    approx = True

    def __init__(self, scale: SupernaturalScale, stage: int | None = None, K: int = 4,
                 grid_count: int | None = None):
        super().__init__(scale, scale.M if stage is None else stage)
        if K < 0:
            raise ValueError("Laurent truncation K must be >= 0")
        self.K = K
        self.grid = CircleGrid(grid_count) if grid_count else default_grid(K, scale[self.stage])

    @property
    def coefficient_grid(self) -> CircleGrid:
        """Circle points ``(theta_g + 2 pi l)/s`` seen by the fibre samples."""
        return CircleGrid(self.grid.count * self.scale[self.stage])

    def to_bloch(self, a: BDElement) -> BlochElement:
        return bloch_element(a, self.grid, self.stage)

    def unit(self) -> BlochElement:
        return self.to_bloch(identity(self.scale, self.stage))

    def zero(self) -> BlochElement:
        return 0 * self.unit()

    def coerce(self, a) -> BlochElement:
        if isinstance(a, BDElement):
            return self.to_bloch(a)
        if a.stage != self.stage or a.thetas.size != self.grid.count:
            raise ValueError("Bloch samples do not match the working stage and grid")
        return a

    def expectation(self, a, n: int) -> BlochElement:
        return bloch_expectation(self.coerce(a), n)

    def norm(self, a) -> float:
        return self.coerce(a).norm()

    def norms(self, elements) -> list[float]:
        if not elements:
            return []
        stack = np.stack([self.coerce(x).mats for x in elements])
        return [float(v) for v in np.max(spectral_norms(stack), axis=1)]

    def exp_i(self, a, t: float) -> BlochElement:
        x = self.coerce(a)
        if hermitian_defect(x.mats) > 1e-10:
            raise ValueError("exp_i needs a self-adjoint element")
        return BlochElement(self.scale, self.stage, x.thetas, exp_i_hermitian(x.mats, t))

    def is_self_adjoint(self, a, tol: float = 1e-10) -> bool:
        return hermitian_defect(self.coerce(a).mats) <= tol

    def random_laurent(self, rng, self_adjoint=False, lengths=None) -> BDElement:
        a = random_element(self.scale, self.stage, self.K, rng, lengths)
        if self_adjoint:
            a = 0.5 * (a + a.adjoint())
        return a

    def random(self, rng, self_adjoint=False, lengths=None) -> BlochElement:
        return self.to_bloch(self.random_laurent(rng, self_adjoint, lengths))

    def describe(self) -> dict:
        out = super().describe()
        out.update({"K": self.K, "grid": self.grid.count})
        return out
