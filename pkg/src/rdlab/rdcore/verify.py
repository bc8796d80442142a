"""Numerical checks of the projection identities and RD-norm inequalities.

Every check returns :class:`VerificationReport` objects holding both sides of
the inequality ``lhs <= rhs + tolerance``.  Checks whose hypotheses fail (for
example a length sequence violating ``lam_n >= 2*omega*(n+1)``) come back
skipped with a reason rather than passed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from ..scales import LengthSequence
from .blocks import BlockVector, block_decompose, head_tail, rd_norm, sub_blockvector
from .contract import FilteredAlgebra

__all__ = [
    "VerificationReport",
    "PBEReport",
    "verify_projection",
    "verify_bimodularity",
    "verify_uniform_bound",
    "verify_star_compatibility",
    "verify_block_product_lemma",
    "verify_stage_norm_bound",
    "verify_submultiplicative",
    "verify_tail_bound",
    "verify_head_exponential",
    "verify_head_tail_product",
    "verify_trotter_bound",
    "pbe_experiment",
    "verify_leibniz_pbe_pair",
    "norm_equivalence_report",
    "fit_loglog_slope",
    "log_t_grid",
]

ABS_TOL = 1e-9


@dataclass
class VerificationReport:
    check: str
    lhs: float
    rhs: float
    tolerance: float
    params: dict = field(default_factory=dict)
    skipped: bool = False
    reason: str = ""
    approx: bool = False

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool | None:
        if self.skipped:
            return None
        return bool(self.lhs <= self.rhs + self.tolerance)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "params": dict(sorted(self.params.items())),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "skipped": self.skipped,
            "reason": self.reason,
            "approx": self.approx,
        }


def _skip(check: str, reason: str, params: dict, approx: bool = False) -> VerificationReport:
    return VerificationReport(check, math.nan, math.nan, 0.0, params, skipped=True, reason=reason,
                              approx=approx)


def _tol(alg: FilteredAlgebra, scale: float, approx_tol: float = 1e-6) -> float:
    base = approx_tol if alg.approx else ABS_TOL
    return base * max(scale, 1.0)


def _safe_exp(x: float) -> float:
    return math.exp(x) if x < 700.0 else math.inf


def _rd_gate(check: str, L: LengthSequence, params: dict, alg: FilteredAlgebra) -> VerificationReport | None:
    if L.omega < alg.omega:
        return _skip(check, f"length sequence omega={L.omega} below algebra omega={alg.omega}", params,
                     alg.approx)
    if not L.rd_admissible:
        return _skip(check, "lengths violate lam_n >= 2*omega*(n+1)", params, alg.approx)
    return None


# ---------------------------------------------------------------- contract


def verify_projection(alg: FilteredAlgebra, a, n: int) -> VerificationReport:
    e = alg.expectation(a, n)
    lhs = alg.norm(alg.expectation(e, n) - e)
    return VerificationReport("projection", lhs, 0.0, 1e-10 * max(alg.norm(a), 1.0), {"n": n},
                              approx=alg.approx)


def verify_bimodularity(alg: FilteredAlgebra, a, b, n: int) -> list[VerificationReport]:
    """``E_n(ab) = E_n(a) b`` and ``E_n(ba) = b E_n(a)`` for ``b`` already in ``A_n``."""
    b = alg.expectation(b, n)
    tol = ABS_TOL * max(alg.norm(a) * alg.norm(b), 1e-300)
    left = alg.norm(alg.expectation(a * b, n) - alg.expectation(a, n) * b)
    right = alg.norm(alg.expectation(b * a, n) - b * alg.expectation(a, n))
    return [VerificationReport("bimodular_right", left, 0.0, tol, {"n": n}, approx=alg.approx),
            VerificationReport("bimodular_left", right, 0.0, tol, {"n": n}, approx=alg.approx)]


def verify_uniform_bound(alg: FilteredAlgebra, a, n: int, omega: float | None = None) -> VerificationReport:
    """``||E_{m,n}(a)|| <= omega ||a||``."""
    omega = alg.omega if omega is None else omega
    na = alg.norm(a)
    params = {"n": n, "omega": omega}
    if na == 0.0:
        return VerificationReport("uniform_bound", 0.0, 0.0, 0.0, params, approx=alg.approx)
    lhs = alg.norm(alg.expectation(a, n))
    return VerificationReport("uniform_bound", lhs, omega * na, 1e-9, params, approx=alg.approx)


def verify_star_compatibility(alg: FilteredAlgebra, a) -> VerificationReport:
    bv = block_decompose(alg, a)
    bs = block_decompose(alg, a.adjoint())
    lhs = max(alg.norm(x.adjoint() - y) for x, y in zip(bv.blocks, bs.blocks))
    return VerificationReport("star_compatibility", lhs, 0.0, 1e-10 * max(alg.norm(a), 1.0), {},
                              approx=alg.approx)


# ---------------------------------------------------------------- lemmas


def verify_block_product_lemma(alg: FilteredAlgebra, a, b, n: int, m: int) -> VerificationReport:
    """Product of blocks: ``B_n B_m ⊂ B_max(n,m)`` if ``n != m``, else only ``⊂ A_n``.

    ``a`` must lie in ``B_n`` and ``b`` in ``B_m``.
    """
    ab = a * b
    tol = ABS_TOL * alg.norm(a) * alg.norm(b)
    if alg.approx:
        tol = max(tol, 1e-6 * alg.norm(a) * alg.norm(b))
    params = {"n": n, "m": m}
    if n != m:
        k = max(n, m)
        lhs = alg.norm(alg.expectation(ab, k - 1))
        return VerificationReport("block_product_kernel", lhs, 0.0, tol, params, approx=alg.approx)
    if n == alg.stage:
        return VerificationReport("block_product_stage", 0.0, 0.0, tol, params, approx=alg.approx)
    lhs = alg.norm(ab - alg.expectation(ab, n))
    return VerificationReport("block_product_stage", lhs, 0.0, tol, params, approx=alg.approx)


def verify_stage_norm_bound(alg: FilteredAlgebra, a, n: int, N: int, L: LengthSequence) -> VerificationReport:
    """``||a||_N <= ||a|| lam_n**(N+1)`` for ``a`` in ``A_n``."""
    params = {"n": n, "N": N}
    gate = _rd_gate("stage_norm_bound", L, params, alg)
    if gate:
        return gate
    bv = block_decompose(alg, a)
    lhs = rd_norm(bv, N, L)
    rhs = alg.norm(a) * L[n] ** (N + 1)
    return VerificationReport("stage_norm_bound", lhs, rhs, _tol(alg, rhs), params, approx=alg.approx)


def verify_submultiplicative(alg: FilteredAlgebra, a, b, N: int, L: LengthSequence,
                             bva: BlockVector | None = None, bvb: BlockVector | None = None) -> VerificationReport:
    """``||ab||_N <= ||a||_N ||b||_N`` for ``N >= 1``; the mixed bound for ``N = 0``."""
    params = {"N": N}
    gate = _rd_gate("submultiplicative", L, params, alg)
    if gate:
        return gate
    bva = bva or block_decompose(alg, a)
    bvb = bvb or block_decompose(alg, b)
    lhs = rd_norm(block_decompose(alg, a * b), N, L)
    if N >= 1:
        rhs = rd_norm(bva, N, L) * rd_norm(bvb, N, L)
        return VerificationReport("submultiplicative", lhs, rhs, _tol(alg, rhs), params, approx=alg.approx)
    rhs = min(rd_norm(bva, 1, L) * rd_norm(bvb, 0, L), rd_norm(bva, 0, L) * rd_norm(bvb, 1, L))
    return VerificationReport("submultiplicative_mixed", lhs, rhs, _tol(alg, rhs), params, approx=alg.approx)


def verify_tail_bound(bv: BlockVector, n: int, N: float, alpha: float, L: LengthSequence,
                      approx: bool = False) -> VerificationReport:
    """``||a_{>n}||_N <= lam_{n+1}**(-alpha) ||a_{>n}||_{N+alpha}``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    params = {"n": n, "N": N, "alpha": alpha}
    if n >= bv.stage:
        return VerificationReport("tail_bound", 0.0, 0.0, 0.0, params, approx=approx)
    tail = sub_blockvector(bv, range(n + 1, bv.stage + 1))
    lhs = rd_norm(tail, N, L)
    rhs = rd_norm(tail, N + alpha, L) / L[n + 1] ** alpha
    return VerificationReport("tail_bound", lhs, rhs, 1e-12 * max(rhs, 1.0), params, approx=approx)


def verify_head_exponential(alg: FilteredAlgebra, a, n: int, N: int, L: LengthSequence,
                            bv: BlockVector | None = None) -> VerificationReport:
    """``||exp(i a_{<=n})||_N <= lam_n**(N+1)`` for self-adjoint ``a``."""
    params = {"n": n, "N": N}
    gate = _rd_gate("head_exponential", L, params, alg)
    if gate:
        return gate
    bv = bv or block_decompose(alg, a)
    head, _ = head_tail(bv, n)
    u = alg.exp_i(head, 1.0)
    lhs = rd_norm(block_decompose(alg, u), N, L)
    rhs = L[n] ** (N + 1)
    return VerificationReport("head_exponential", lhs, rhs, _tol(alg, rhs), params, approx=alg.approx)


def verify_head_tail_product(alg: FilteredAlgebra, a, b, n: int, N: int, L: LengthSequence,
                             bva: BlockVector | None = None, bvb: BlockVector | None = None) -> list[VerificationReport]:
    """``||a_{<=n} b_{>n}||_N`` and ``||b_{>n} a_{<=n}||_N`` against ``||a_{<=n}||_0 ||b_{>n}||_N``."""
    bva = bva or block_decompose(alg, a)
    bvb = bvb or block_decompose(alg, b)
    head, _ = head_tail(bva, n)
    _, tail = head_tail(bvb, n)
    rhs = (rd_norm(sub_blockvector(bva, range(n + 1)), 0, L)
           * rd_norm(sub_blockvector(bvb, range(n + 1, bvb.stage + 1)), N, L))
    out = []
    for name, prod in (("head_tail_product", head * tail), ("tail_head_product", tail * head)):
        lhs = rd_norm(block_decompose(alg, prod), N, L)
        out.append(VerificationReport(name, lhs, rhs, _tol(alg, rhs), {"n": n, "N": N}, approx=alg.approx))
    return out


def verify_trotter_bound(alg: FilteredAlgebra, a, t: float, n: int, N: int, L: LengthSequence,
                         bv: BlockVector | None = None) -> VerificationReport:
    """``||exp(ita)||_N <= lam_n**(N+1) exp(|t| lam_n**2 ||a_{>n}||_N)`` with the exact exponential."""
    params = {"t": t, "n": n, "N": N}
    if N < 1:
        return _skip("trotter_bound", "requires N >= 1", params, alg.approx)
    gate = _rd_gate("trotter_bound", L, params, alg)
    if gate:
        return gate
    bv = bv or block_decompose(alg, a)
    tail = sub_blockvector(bv, range(n + 1, bv.stage + 1))
    lhs = rd_norm(block_decompose(alg, alg.exp_i(a, t)), N, L)
    rhs = L[n] ** (N + 1) * _safe_exp(abs(t) * L[n] ** 2 * rd_norm(tail, N, L))
    return VerificationReport("trotter_bound", lhs, rhs, _tol(alg, min(rhs, 1e300)), params,
                              approx=alg.approx)


# ---------------------------------------------------------------- PBE


def log_t_grid(t_min: float = 1.0, t_max: float = 1e3, count: int = 16) -> np.ndarray:
    return np.geomspace(t_min, t_max, count)


def fit_loglog_slope(ts: Sequence[float], values: Sequence[float]) -> float:
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    ok = (ts > 0) & (values > 0)
    if ok.sum() < 2:
        return 0.0
    return float(np.polyfit(np.log(ts[ok]), np.log(values[ok]), 1)[0])


@dataclass
class PBEReport:
    N: int
    t: list[float]
    norms: list[float]
    bounds: list[float]
    rows: list[VerificationReport]
    slope: float
    exponent: int
    approx: bool = False

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def worst_margin(self) -> float:
        return min(r.margin for r in self.rows)

    def table(self) -> list[dict]:
        return [{"t": t, "N": self.N, "norm": v, "bound": b, "margin": b - v, "pass": r.passed}
                for t, v, b, r in zip(self.t, self.norms, self.bounds, self.rows)]


def pbe_experiment(alg: FilteredAlgebra, a, N: int, t_grid: Iterable[float], L: LengthSequence,
                   margin_tol: float = 1e-6) -> PBEReport:
    """Tabulate ``||exp(ita)||_N`` against ``|t|**(N+1) exp(||a||_{N+3})``.

    The closed-form bound is derived by picking ``n`` with ``lam_n <= |t|``;
    rows with ``|t| < lam_0`` carry ``in_regime = False`` in their params.
    """
    ts = [float(t) for t in t_grid]
    if len(L) < alg.stage + 1:
        raise ValueError("length sequence shorter than the working stage")
    gate = _rd_gate("pbe_bound", L, {"N": N}, alg)
    if gate:
        rows = [_skip("pbe_bound", gate.reason, {"t": t, "N": N}, alg.approx) for t in ts]
        return PBEReport(N, ts, [math.nan] * len(ts), [math.nan] * len(ts), rows, math.nan, N + 1, alg.approx)
    norm_a = rd_norm(block_decompose(alg, a), N + 3, L)
    growth = _safe_exp(norm_a)
    norms, bounds, rows = [], [], []
    for t in ts:
        v = rd_norm(block_decompose(alg, alg.exp_i(a, t)), N, L)
        b = abs(t) ** (N + 1) * growth
        norms.append(v)
        bounds.append(b)
        rows.append(VerificationReport("pbe_bound", v, b, margin_tol,
                                       {"t": t, "N": N, "in_regime": abs(t) >= L[0]}, approx=alg.approx))
    return PBEReport(N, ts, norms, bounds, rows, fit_loglog_slope(ts, norms), N + 1, alg.approx)


def verify_leibniz_pbe_pair(norm0: Callable[[Any], float], norm1: Callable[[Any], float],
                            pairs: Iterable[tuple[Any, Any]],
                            exp_norms: Callable[[float], tuple[float, float]] | None = None,
                            t_grid: Sequence[float] = (), rel_tol: float = 1e-6,
                            slope_slack: float = 0.1) -> list[VerificationReport]:
    """Leibniz premise ``||ab||_1 <= ||a|| ||b||_1 + ||a||_1 ||b||`` on sample pairs, then growth.

    ``exp_norms(t)`` returns ``(norm0(e^{ita}), norm1(e^{ita}))``; the growth
    report compares the fitted log-log slope of ``norm1`` with one plus the
    slope of ``norm0``.
    """
    out = []
    for a, b in pairs:
        lhs = norm1(a * b)
        rhs = norm0(a) * norm1(b) + norm1(a) * norm0(b)
        out.append(VerificationReport("leibniz", lhs, rhs, rel_tol * max(rhs, 1.0), {}, approx=True))
    if exp_norms is not None and len(t_grid):
        n0, n1 = zip(*(exp_norms(float(t)) for t in t_grid))
        s0 = fit_loglog_slope(t_grid, n0)
        s1 = fit_loglog_slope(t_grid, n1)
        out.append(VerificationReport("leibniz_growth", s1, s0 + 1.0, slope_slack,
                                      {"slope0": s0, "t_max": float(max(t_grid))}, approx=True))
    return out


def norm_equivalence_report(norm_a: Callable[[Any, float], float], norm_b: Callable[[Any, float], float],
                            samples: Iterable[Any], claimed: tuple[float, float], Ns: Sequence[float] = (0, 1, 2),
                            name: str = "norm_equivalence", rel_tol: float = 1e-9,
                            approx: bool = False) -> list[VerificationReport]:
    """``norm_a(x, N) <= C * norm_b(x, N + shift)`` for every sample and ``N``."""
    C, shift = claimed
    out = []
    for x in samples:
        for N in Ns:
            lhs = norm_a(x, N)
            base = norm_b(x, N + shift)
            # ratio is the empirical constant this sample needs
            ratio = lhs / base if base > 0 else 0.0
            out.append(VerificationReport(name, lhs, C * base, rel_tol * max(C * base, 1.0),
                                          {"N": N, "C": C, "shift": shift, "ratio": ratio}, approx=approx))
    return out
