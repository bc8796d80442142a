"""Acceptance criteria 1-13 at their stated tolerances.

Each test records one line in ``conftest.ACCEPTANCE``; the lines are printed
in the terminal summary.  Lemma-level Bunce-Deddens checks run at stage 3 of
the dyadic scale and stage 2 of the mixed scale; the uniform bound and the
PBE run use the full stage 5 (s = 32).
"""
from __future__ import annotations

import itertools
import time

import numpy as np
import pytest

import conftest
from rdlab import bunce_deddens as bd
from rdlab import experiments as ex
from rdlab import odometer as odo
from rdlab import uhf
from rdlab.experiments import ExperimentConfig, build_algebra, build_lengths, run_verify, to_csv
from rdlab.numerics import CircleGrid
from rdlab.rdcore import block_decompose
from rdlab.rdcore.blocks import random_block
from rdlab.rdcore.verify import log_t_grid, pbe_experiment, verify_uniform_bound
from rdlab.scales import SupernaturalScale, canonicalize, shell

DYADIC = (1, 2, 4, 8, 16, 32)
MIXED = (1, 2, 6, 12, 24)
SAMPLES = 200

# (algebra, scale, working stage) for the lemma-level criteria
TARGETS = [
    ("sequences", DYADIC, 5),
    ("odometer", DYADIC, 5), ("odometer", MIXED, 4),
    ("dihedral", DYADIC, 5), ("dihedral", MIXED, 4),
    ("uhf", DYADIC, 5), ("uhf", MIXED, 4),
    ("bunce_deddens", DYADIC, 3), ("bunce_deddens", MIXED, 2),
]


def record(k: int, ok: bool, detail: str) -> None:
    conftest.ACCEPTANCE[k] = (bool(ok), detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


def setup(algebra, scale, stage, samples=SAMPLES):
    cfg = ExperimentConfig(algebra=algebra, scale=scale, stage=stage, samples=samples)
    alg = build_algebra(cfg)
    return cfg, alg, build_lengths(cfg, alg)


_CACHE: dict = {}


def suite(name: str, target) -> list:
    key = (name, target)
    if key not in _CACHE:
        cfg, alg, L = setup(*target)
        _CACHE[key] = getattr(ex, name)(alg, cfg, L)
    return _CACHE[key]


def failures(reports) -> list:
    return [r for r in reports if r.passed is False]


def label(t) -> str:
    return f"{t[0]}@s={t[1][t[2]]}"


# ---------------------------------------------------------------- 1


def test_criterion_01_expectation_identities():
    t0 = time.perf_counter()
    worst = 0.0
    for s in (DYADIC, MIXED):
        S = SupernaturalScale(s)
        for n in range(S.M):
            m = n + 1
            for z in shell(n, S) + [w for k in range(n) for w in shell(k, S)]:
                chi = odo.character(z, m, S)
                worst = max(worst, np.max(np.abs(odo.expectation(chi, n).embed(m).values - chi.values)))
            for z in shell(m, S):
                worst = max(worst, odo.sup_norm(odo.expectation(odo.character(z, m, S), n)))
    bd_gap = 0.0
    rng = np.random.default_rng(1)
    for s in (DYADIC, MIXED):
        S = SupernaturalScale(s)
        a = bd.random_element(S, S.M, 4, rng)
        for n in range(S.M):
            g, h = bd.expectation_restrict(a, n), bd.expectation_average(a, n)
            K = max(g.K, h.K)
            bd_gap = max(bd_gap, np.max(np.abs(g.widen(K).coeffs - h.widen(K).coeffs)))
            for z in shell(n + 1, S)[:3]:
                mono = bd.from_terms({z: {-2: 1.0, 3: 1.0}}, n + 1, S)
                bd_gap = max(bd_gap, np.max(np.abs(bd.expectation(mono, n).coeffs)))
    uhf_ok = True
    for s in (DYADIC, MIXED):
        S = SupernaturalScale(s)
        for n in range(S.M):
            for x, y in itertools.product(range(S[n + 1]), repeat=2):
                got = uhf.expectation(uhf.matrix_unit(n + 1, x, y, S), n).matrix
                want = uhf.matrix_unit(n, x, y, S).matrix if max(x, y) < S[n] else np.zeros((S[n], S[n]))
                uhf_ok &= bool(np.array_equal(got, want))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and bd_gap <= 1e-12 and uhf_ok and dt < 10
    record(1, ok, f"odometer {worst:.1e}, BD paths {bd_gap:.1e}, UHF exact={uhf_ok}, {dt:.1f}s")
    assert ok


# ---------------------------------------------------------------- 2


def test_criterion_02_uniform_bound():
    worst = {}
    bad = 0
    for algebra, scales in [("odometer", (DYADIC, MIXED)), ("uhf", (DYADIC, MIXED)), ("dihedral", (DYADIC, MIXED)),
                            ("bunce_deddens", (DYADIC, MIXED))]:
        for s in scales:
            stages = range(len(s)) if algebra != "bunce_deddens" else [len(s) - 1]
            for m in stages:
                cfg, alg, L = setup(algebra, s, m)
                for i in range(SAMPLES):
                    a = alg.random(np.random.default_rng([2, m, i]))
                    for n in range(m + 1):
                        r = verify_uniform_bound(alg, a, n)
                        ratio = r.lhs / r.rhs * alg.omega if r.rhs else 0.0
                        worst[algebra] = max(worst.get(algebra, 0.0), ratio)
                        # strict form: ||E(a)|| <= omega ||a|| + 1e-9
                        bad += r.lhs > r.rhs + 1e-9
    detail = ", ".join(f"{k} max ratio {v:.4f}" for k, v in worst.items())
    record(2, bad == 0, f"{bad} violations; {detail}")
    assert bad == 0


# ---------------------------------------------------------------- 3


def test_criterion_03_block_products():
    bad, total, worst = 0, 0, 0.0
    for target in TARGETS:
        if target[0] == "sequences":
            continue
        cfg, alg, L = setup(*target)
        m = alg.stage
        pairs = [(n, k) for n in range(m + 1) for k in range(m + 1) if n != k]
        for i in range(SAMPLES):
            rng = np.random.default_rng([3, i])
            n, k = pairs[i % len(pairs)]
            a, b = random_block(alg, rng, n, lengths=L), random_block(alg, rng, k, lengths=L)
            scale = alg.norm(a) * alg.norm(b)
            lhs = alg.norm(alg.expectation(a * b, max(n, k) - 1))
            worst = max(worst, lhs / scale if scale else 0.0)
            bad += lhs > 1e-9 * scale
            total += 1
    record(3, bad == 0, f"{bad}/{total} violations, worst relative {worst:.1e}")
    assert bad == 0


# ---------------------------------------------------------------- 4-7, 9


def _lemma(k: int, names: list[str], checks: set[str] | None = None):
    bad, total, skipped = 0, 0, 0
    per = []
    for target in TARGETS:
        reps = [r for name in names for r in suite(name, target)]
        if checks:
            reps = [r for r in reps if r.check in checks]
        f = failures(reps)
        bad += len(f)
        total += len(reps)
        skipped += sum(r.skipped for r in reps)
        if f:
            per.append(f"{label(target)}:{len(f)}")
    ok = bad == 0 and total > skipped
    record(k, ok, f"{bad}/{total} violations ({skipped} skipped) {' '.join(per)}")
    return ok


def test_criterion_04_stage_norm_bound():
    assert _lemma(4, ["stage_bound_checks"])


def test_criterion_05_submultiplicative():
    assert _lemma(5, ["submultiplicative_checks"])


def test_criterion_06_tail_head_lemmas():
    assert _lemma(6, ["tail_checks", "head_exponential_checks", "head_tail_checks"])


def test_criterion_07_trotter_bound():
    assert _lemma(7, ["trotter_checks"])


def test_criterion_09_norm_equivalences():
    targets_ok = _lemma(9, ["equivalence_checks"])
    # the reverse directions must actually have run on the default 2-adic scale
    for t in TARGETS:
        if t[0] != "sequences" and t[1] == DYADIC:
            assert not any(r.skipped for r in suite("equivalence_checks", t))
    assert targets_ok


# ---------------------------------------------------------------- 8


def test_criterion_08_pbe():
    lines, ok = [], True
    for algebra in ("sequences", "odometer", "dihedral", "uhf", "bunce_deddens"):
        t0 = time.perf_counter()
        cfg, alg, L = setup(algebra, DYADIC, 5)
        a = ex._pbe_element(alg, cfg, L)
        rep = pbe_experiment(alg, a, 1, log_t_grid(1.0, 1e3, 16), L)
        dt = time.perf_counter() - t0
        margin = min(r.margin for r in rep.rows)
        good = margin >= -1e-6 and rep.slope <= 2.1 and dt < 60
        ok &= good
        lines.append(f"{algebra} slope {rep.slope:.3f} margin {margin:.2e} {dt:.1f}s")
    record(8, ok, "; ".join(lines))
    assert ok


# ---------------------------------------------------------------- 10


def test_criterion_10_leibniz_pair():
    cfg, alg, L = setup("bunce_deddens", DYADIC, 3)
    reps = ex.leibniz_checks(alg, cfg, L)
    pairs = [r for r in reps if r.check == "leibniz"]
    growth = [r for r in reps if r.check == "leibniz_growth"][0]
    ok = len(pairs) == SAMPLES and not failures(reps)
    record(10, ok, f"Leibniz {len(failures(pairs))}/{len(pairs)} violations; "
                   f"slopes norm0 {growth.params['slope0']:.3f} norm1 {growth.lhs:.3f}")
    assert ok


# ---------------------------------------------------------------- 11


def test_criterion_11_matrix_units():
    ok = True
    for s in (DYADIC, MIXED):
        S = SupernaturalScale(s)
        for n in range(min(S.M, 3) + 1):
            sn = S[n]
            P = {(x, y): uhf.matrix_unit(n, x, y, S).matrix for x in range(sn) for y in range(sn)}
            ok &= all(np.array_equal(P[(x, y)].conj().T, P[(y, x)]) for x, y in P)
            for (x, y), (w, z) in itertools.product(P, P):
                want = P[(x, z)] if y == w else 0 * P[(x, z)]
                ok &= bool(np.array_equal(P[(x, y)] @ P[(w, z)], want))
            ok &= bool(np.array_equal(sum(P[(x, x)] for x in range(sn)), np.eye(sn)))
            if n < S.M:
                r = S.ratio(n)
                for x, y in P:
                    tot = sum(uhf.matrix_unit(n + 1, x + j * sn, y + j * sn, S).matrix for j in range(r))
                    ok &= bool(np.array_equal(tot, uhf.embed(uhf.matrix_unit(n, x, y, S), n + 1).matrix))
            if sn <= 12:
                W = 4 * sn
                inner = uhf.window_interior(n, W, S)
                Pw = {k: uhf.window_rep(n, *k, W, S) for k in P}
                ok &= all(np.array_equal(Pw[(x, y)].T, Pw[(y, x)]) for x, y in Pw)
                for (x, y), (w, z) in itertools.product(Pw, Pw):
                    prod = (Pw[(x, y)] @ Pw[(w, z)])[inner, inner]
                    want = Pw[(x, z)][inner, inner] if y == w else 0 * prod
                    ok &= bool(np.array_equal(prod, want))
                ok &= bool(np.array_equal(sum(Pw[(x, x)] for x in range(sn)), np.eye(2 * W + 1)))
    record(11, ok, "stage relations and window interiors exact" if ok else "relation mismatch")
    assert ok


# ---------------------------------------------------------------- 12


def test_criterion_12_oracles():
    rng = np.random.default_rng(12)
    exp_gap = conv_gap = 0.0
    for s in (DYADIC, MIXED):
        S = SupernaturalScale(s)
        for _ in range(SAMPLES):
            f = odo.random_element(S, S.M, rng)
            g = odo.random_element(S, S.M, rng)
            n = int(rng.integers(0, S.M))
            exp_gap = max(exp_gap, np.max(np.abs(odo.expectation_average(f, n).values
                                                 - odo.expectation_restrict(f, n).values)))
            if S[S.M] <= 24 or _ < 20:
                conv_gap = max(conv_gap, np.max(np.abs(odo.convolution_product(f, g).values - (f * g).values)))
    cfg, alg, L = setup("bunce_deddens", DYADIC, 3)
    order, gaps = 0, []
    for i in range(SAMPLES):
        a = bd.random_element(alg.scale, alg.stage, 4, np.random.default_rng([12, i]))
        est, low = bd.cstar_norm(a)
        order += low > est + 1e-8
        gaps.append(est - low)
    gap = max(gaps)
    ok_oracles = exp_gap <= 1e-12 and conv_gap <= 1e-10
    ok = ok_oracles and order == 0 and gap < 1e-3
    record(12, ok, f"E_n paths {exp_gap:.1e}, products {conv_gap:.1e}; bracket order violations {order}, "
                   f"max gap {gap:.3e} (median {np.median(gaps):.3e}) at W=4(K+s)")
    assert ok_oracles and order == 0
    assert gap < 1e-3, "window lower bound converges like 1/W^2; default W leaves a visible gap"


# ---------------------------------------------------------------- 13


def test_criterion_13_determinism():
    cfg = ExperimentConfig(algebra="odometer", scale=DYADIC, samples=SAMPLES, seed=13)
    a, b = to_csv(run_verify(cfg)), to_csv(run_verify(cfg))
    cfg_bd = ExperimentConfig(algebra="bunce_deddens", scale=(1, 2, 4), samples=5, seed=13, bd_k=2)
    c, d = to_csv(run_verify(cfg_bd, jobs=2)), to_csv(run_verify(cfg_bd, jobs=1))
    ok = a == b and c == d
    record(13, ok, f"identical CSV payloads ({len(a.splitlines())} and {len(c.splitlines())} rows)")
    assert ok
