"""Config-driven verification runs and their reports.

A run builds one filtered algebra from an :class:`ExperimentConfig`, draws
seeded random elements and collects :class:`VerificationReport` rows in a
fixed order.  Each sample gets its own generator seeded by
``(seed, check_id, sample_index)``, so results do not depend on ``jobs``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import bunce_deddens as bd
from . import dihedral as sd
from . import odometer as odo
from . import uhf
from .rdcore import (FilteredAlgebra, PBEReport, SequenceAlgebra, SequenceElement, VerificationReport,
                     block_decompose, head_tail, log_t_grid, norm_equivalence_report, pbe_experiment, random_block,
                     rd_norm, rd_norm_table, verify_bimodularity, verify_block_product_lemma,
                     verify_head_exponential, verify_head_tail_product, verify_leibniz_pbe_pair, verify_projection,
                     verify_stage_norm_bound, verify_star_compatibility, verify_submultiplicative,
                     verify_tail_bound, verify_trotter_bound, verify_uniform_bound)
from .scales import LengthSequence, SupernaturalScale

__all__ = ["ExperimentConfig", "ReportBundle", "load_config", "build_algebra", "build_lengths", "run_verify",
           "run_pbe", "run_equiv", "decompose", "emit", "CSV_COLUMNS", "ALGEBRAS"]

ALGEBRAS = ("sequences", "odometer", "dihedral", "bunce_deddens", "uhf")
CSV_COLUMNS = ("check", "params", "lhs", "rhs", "margin", "pass", "approx")

# stable ids keep per-check random streams independent of which checks run
CHECK_IDS = {"contract": 1, "block_product": 2, "stage_bound": 3, "submultiplicative": 4, "tail": 5,
             "head_exponential": 6, "head_tail": 7, "trotter": 8, "pbe": 9, "equivalence": 10, "leibniz": 11,
             "bracket": 12}


@dataclass
class ExperimentConfig:
    """Everything a run depends on.  See ``configs/default.toml`` for the file form."""

    algebra: str = "odometer"
    scale: tuple[int, ...] = (1, 2, 4, 8, 16, 32)
    stage: int | None = None
    lengths: tuple[float, ...] | None = None
    length_ratio: float = 2.0
    omega: float | None = None
    n_max: int = 4
    t_min: float = 1.0
    t_max: float = 1000.0
    t_count: int = 16
    pbe_n: int = 1
    pbe_element: str = "random"
    pbe_scale: float = 300.0
    samples: int = 200
    seed: int = 0
    bd_k: int = 4
    bd_window: int | None = None
    bd_grid: int | None = None
    c: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        self.scale = tuple(int(x) for x in self.scale)
        if self.lengths is not None:
            self.lengths = tuple(float(x) for x in self.lengths)
        if self.algebra not in ALGEBRAS:
            raise ValueError(f"unknown algebra {self.algebra!r}; choose from {', '.join(ALGEBRAS)}")
        if self.samples < 0 or self.t_count < 1 or self.n_max < 0:
            raise ValueError("samples, t_count and n_max must be non-negative (t_count >= 1)")
        if self.pbe_element not in ("random", "unit", "zero"):
            raise ValueError("pbe_element must be random, unit or zero")
        if self.pbe_scale < 0:
            raise ValueError("pbe_scale must be >= 0")
        if not 0 < self.t_min <= self.t_max:
            raise ValueError("need 0 < t_min <= t_max")

    @property
    def working_stage(self) -> int:
        return len(self.scale) - 1 if self.stage is None else self.stage

    def to_dict(self) -> dict:
        out = asdict(self)
        out["scale"] = list(self.scale)
        out["lengths"] = None if self.lengths is None else list(self.lengths)
        return out


def load_config(path: str | Path | None = None, **overrides) -> ExperimentConfig:
    """Read a TOML file (flat keys plus optional ``[bd]`` and ``[certificate]`` tables)."""
    data: dict[str, Any] = {}
    if path is not None:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        for key, value in raw.items():
            if key == "bd" and isinstance(value, dict):
                data.update({f"bd_{k}": v for k, v in value.items()})
            elif key == "certificate" and isinstance(value, dict):
                data.update(value)
            else:
                data[key] = value
    data.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return ExperimentConfig(**data)


def build_algebra(cfg: ExperimentConfig) -> FilteredAlgebra:
    m = cfg.working_stage
    if cfg.algebra == "sequences":
        return SequenceAlgebra(m)
    S = SupernaturalScale(cfg.scale)
    if cfg.algebra == "odometer":
        return odo.OdometerAlgebra(S, m)
    if cfg.algebra == "dihedral":
        return sd.DihedralAlgebra(S, m)
    if cfg.algebra == "bunce_deddens":
        return bd.BDAlgebra(S, m, K=cfg.bd_k, grid_count=cfg.bd_grid)
    return uhf.UHFAlgebra(S, m)


def build_lengths(cfg: ExperimentConfig, alg: FilteredAlgebra) -> LengthSequence:
    omega = alg.omega if cfg.omega is None else cfg.omega
    if cfg.lengths is not None:
        L = LengthSequence(cfg.lengths, omega=omega, c=cfg.c, beta=cfg.beta)
    else:
        L = LengthSequence.geometric(cfg.length_ratio, alg.stage, omega=omega, c=cfg.c, beta=cfg.beta)
    if len(L) < alg.stage + 1:
        raise ValueError(f"length sequence has {len(L)} entries, stage {alg.stage} needs {alg.stage + 1}")
    return L


@dataclass
class ReportBundle:
    config: dict
    reports: list[VerificationReport] = field(default_factory=list)
    pbe: list[PBEReport] = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    timestamp: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports if not r.skipped)

    def summary(self) -> dict:
        per: dict[str, dict] = {}
        for r in self.reports:
            d = per.setdefault(r.check, {"total": 0, "passed": 0, "failed": 0, "skipped": 0, "worst_margin": None})
            d["total"] += 1
            if r.skipped:
                d["skipped"] += 1
                continue
            d["passed" if r.passed else "failed"] += 1
            if d["worst_margin"] is None or r.margin < d["worst_margin"]:
                d["worst_margin"] = r.margin
            if "ratio" in r.params:
                d["empirical_constant"] = max(d.get("empirical_constant", 0.0), r.params["ratio"])
        return {"checks": dict(sorted(per.items())),
                "pbe_slopes": [{"N": p.N, "slope": p.slope, "exponent": p.exponent} for p in self.pbe],
                "all_passed": self.passed}

    def payload(self) -> dict:
        return {
            "config": self.config,
            "flags": self.flags,
            "summary": self.summary(),
            "reports": [r.to_dict() for r in self.reports],
            "pbe_tables": [{"N": p.N, "slope": p.slope, "rows": p.table()} for p in self.pbe],
            "versions": {"python": platform.python_version(), "numpy": np.__version__, "rdlab": _version()},
            "timestamp": self.timestamp,
        }


def _version() -> str:
    from . import __version__
    return __version__


# ---------------------------------------------------------------- sampling


def _rng(cfg: ExperimentConfig, check: str, idx: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, CHECK_IDS[check], idx])


def _map(fn: Callable[[int], list], count: int, jobs: int) -> list:
    """Run ``fn`` on ``0..count-1`` and concatenate the results in index order."""
    if jobs > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(fn, range(count)))
    else:
        chunks = [fn(i) for i in range(count)]
    return [r for chunk in chunks for r in chunk]


def _tag(reports: list[VerificationReport], idx: int) -> list[VerificationReport]:
    for r in reports:
        r.params.setdefault("sample", idx)
    return reports


# ---------------------------------------------------------------- suites


def contract_checks(alg, cfg, L, jobs=1) -> list[VerificationReport]:
    m = alg.stage

    def one(i):
        rng = _rng(cfg, "contract", i)
        a, b = alg.random(rng, lengths=L), alg.random(rng, lengths=L)
        out = []
        for n in range(m + 1):
            out.append(verify_projection(alg, a, n))
            out.extend(verify_bimodularity(alg, a, b, n))
            out.append(verify_uniform_bound(alg, a, n))
        out.append(verify_star_compatibility(alg, a))
        return _tag(out, i)

    return _map(one, cfg.samples, jobs)


def block_product_checks(alg, cfg, L, jobs=1):
    m = alg.stage
    pairs = [(n, k) for n in range(m + 1) for k in range(m + 1)]

    def one(i):
        rng = _rng(cfg, "block_product", i)
        n, k = pairs[i % len(pairs)]
        a = random_block(alg, rng, n, lengths=L)
        b = random_block(alg, rng, k, lengths=L)
        return _tag([verify_block_product_lemma(alg, a, b, n, k)], i)

    return _map(one, cfg.samples, jobs)


def stage_bound_checks(alg, cfg, L, jobs=1):
    top = min(3, alg.stage)

    def one(i):
        rng = _rng(cfg, "stage_bound", i)
        n = i % (top + 1)
        a = alg.expectation(alg.random(rng, lengths=L), n)
        return _tag([verify_stage_norm_bound(alg, a, n, N, L) for N in (0, 1, 2)], i)

    return _map(one, cfg.samples, jobs)


def submultiplicative_checks(alg, cfg, L, jobs=1):
    def one(i):
        rng = _rng(cfg, "submultiplicative", i)
        a, b = alg.random(rng, lengths=L), alg.random(rng, lengths=L)
        bva, bvb = block_decompose(alg, a), block_decompose(alg, b)
        return _tag([verify_submultiplicative(alg, a, b, N, L, bva, bvb) for N in (0, 1, 2)], i)

    return _map(one, cfg.samples, jobs)


def _split_points(alg) -> list[int]:
    return [n for n in (0, 1, 2) if n <= alg.stage]


def tail_checks(alg, cfg, L, jobs=1):
    def one(i):
        rng = _rng(cfg, "tail", i)
        bv = block_decompose(alg, alg.random(rng, lengths=L))
        return _tag([verify_tail_bound(bv, n, N, 3.0, L, approx=alg.approx)
                     for n in _split_points(alg) for N in (1, 2)], i)

    return _map(one, cfg.samples, jobs)


def head_exponential_checks(alg, cfg, L, jobs=1):
    def one(i):
        rng = _rng(cfg, "head_exponential", i)
        a = alg.random(rng, self_adjoint=True, lengths=L)
        bv = block_decompose(alg, a)
        return _tag([verify_head_exponential(alg, a, n, N, L, bv) for n in _split_points(alg) for N in (1, 2)], i)

    return _map(one, cfg.samples, jobs)


def head_tail_checks(alg, cfg, L, jobs=1):
    def one(i):
        rng = _rng(cfg, "head_tail", i)
        a, b = alg.random(rng, lengths=L), alg.random(rng, lengths=L)
        bva, bvb = block_decompose(alg, a), block_decompose(alg, b)
        out = []
        for n in _split_points(alg):
            for N in (1, 2):
                out.extend(verify_head_tail_product(alg, a, b, n, N, L, bva, bvb))
        return _tag(out, i)

    return _map(one, cfg.samples, jobs)


def trotter_checks(alg, cfg, L, jobs=1):
    ns = [n for n in (1, 2) if n <= alg.stage]

    def one(i):
        rng = _rng(cfg, "trotter", i)
        a = alg.random(rng, self_adjoint=True, lengths=L)
        bv = block_decompose(alg, a)
        return _tag([verify_trotter_bound(alg, a, t, n, 1, L, bv) for t in (0.1, 1.0, 5.0, 25.0) for n in ns], i)

    return _map(one, cfg.samples, jobs)


def _pbe_element(alg, cfg, L):
    if cfg.pbe_element == "unit":
        return alg.unit()
    if cfg.pbe_element == "zero":
        return alg.zero()
    a = alg.random(_rng(cfg, "pbe", 0), self_adjoint=True, lengths=L)
    if cfg.pbe_scale > 0:
        a = (cfg.pbe_scale / rd_norm(block_decompose(alg, a), cfg.pbe_n + 3, L)) * a
    return a


def pbe_checks(alg, cfg, L) -> PBEReport | VerificationReport:
    N = cfg.pbe_n
    if N + 3 > cfg.n_max:
        return VerificationReport("pbe_bound", math.nan, math.nan, 0.0, {"N": N}, skipped=True,
                                  reason=f"needs N + 3 <= n_max (N={N}, n_max={cfg.n_max})", approx=alg.approx)
    ts = log_t_grid(cfg.t_min, cfg.t_max, cfg.t_count)
    return pbe_experiment(alg, _pbe_element(alg, cfg, L), N, ts, L)


def _rd(alg, L):
    return lambda x, N: rd_norm(block_decompose(alg, x), N, L)


def equivalence_checks(alg, cfg, L, jobs=1) -> list[VerificationReport]:
    Ns = (0, 1, 2)
    S = alg.scale
    fast = S is not None and L.fast_growth(S)

    def reverse(name, norm_a, samples, C, shift, approx):
        if not fast:
            return [VerificationReport(name, math.nan, math.nan, 0.0, {"C": C, "shift": shift}, skipped=True,
                                       reason="lengths lack the fast-growth certificate s_n <= c lam_n^beta",
                                       approx=approx)]
        tol = 1e-6 if approx else 1e-9
        return norm_equivalence_report(norm_a, _rd(alg, L), samples, (C, shift), Ns, name, tol, approx)

    def draw(i):
        return [alg.random(_rng(cfg, "equivalence", i), lengths=L)]

    if cfg.algebra == "sequences":
        return [VerificationReport("norm_equivalence", math.nan, math.nan, 0.0, {}, skipped=True,
                                   reason="the sequence fixture carries no second norm family")]
    samples = _map(draw, cfg.samples, jobs)
    if cfg.algebra == "odometer":
        star = lambda f, N: odo.star_norm(alg.coerce(f), N, L)
        out = norm_equivalence_report(_rd(alg, L), star, samples, (1.0, 0.0), Ns, "rd_le_star")
        return out + reverse("star_le_rd", star, samples, L.c, L.beta, False)
    if cfg.algebra == "dihedral":
        hsh = lambda a, N: sd.hash_norm(alg.coerce(a), N, L)
        out = norm_equivalence_report(_rd(alg, L), hsh, samples, (1.0, 0.0), Ns, "rd_le_hash")
        return out + reverse("hash_le_rd", hsh, samples, 2.0 * L.c, L.beta, False)
    if cfg.algebra == "bunce_deddens":
        zero_n = lambda a, N: bd.bloch_norm_0N(alg.coerce(a), N, L)
        out = norm_equivalence_report(_rd(alg, L), zero_n, samples, (1.0, 0.0), Ns, "rd_le_0N", 1e-6, True)
        return out + reverse("0N_le_rd", zero_n, samples, L.c, L.beta, True)
    pct = lambda a, N: uhf.percent_norm(alg.coerce(a), N, L)
    out = norm_equivalence_report(_rd(alg, L), pct, samples, (1.0, 0.0), Ns, "rd_le_percent")
    return out + reverse("percent_le_rd", pct, samples, L.c ** 2, 2.0 * L.beta, False)


def leibniz_checks(alg: bd.BDAlgebra, cfg, L, N: float = 1.0, jobs=1) -> list[VerificationReport]:
    """Leibniz premise and growth conclusion for the pair ``(||.||_{0,N}, ||.||_{1,N})``."""
    grid = alg.coefficient_grid
    norm0 = lambda a: bd.norm_0N(a, N, L, grid)
    norm1 = lambda a: bd.norm_MN(a, 1, N, L, grid)

    def draw(i):
        rng = _rng(cfg, "leibniz", i)
        return [(alg.random_laurent(rng, lengths=L), alg.random_laurent(rng, lengths=L))]

    pairs = _map(draw, cfg.samples, jobs)
    h = alg.random_laurent(_rng(cfg, "leibniz", cfg.samples), self_adjoint=True, lengths=L)

    def exp_norms(t):
        E, D = bd.exp_with_derivative(h, t, alg.grid, alg.stage)
        n0 = bd.bloch_norm_0N(E, N, L)
        return n0, n0 + bd.bloch_norm_0N(D, N, L)

    ts = log_t_grid(cfg.t_min, cfg.t_max, cfg.t_count)
    return verify_leibniz_pbe_pair(norm0, norm1, pairs, exp_norms, ts)


def bracket_checks(alg: bd.BDAlgebra, cfg, L, jobs=1) -> list[VerificationReport]:
    """Window lower bound against the fibre-grid estimate on random Laurent elements."""

    def one(i):
        a = alg.random_laurent(_rng(cfg, "bracket", i), lengths=L)
        est, low = bd.cstar_norm(a, W=cfg.bd_window)
        W = cfg.bd_window or bd.default_window(a)
        return [VerificationReport("bloch_bracket", low, est, 1e-8, {"sample": i, "W": W}, approx=True)]

    return _map(one, cfg.samples, jobs)


def _start(cfg: ExperimentConfig, alg, L) -> ReportBundle:
    flags = {"rd_admissible": L.rd_admissible, "omega": L.omega, "algebra_omega": alg.omega,
             "lengths": list(L.lam), "fast_growth": None if alg.scale is None else L.fast_growth(alg.scale)}
    return ReportBundle(cfg.to_dict() | {"algebra_info": alg.describe()}, flags=flags,
                        timestamp={"start": time.strftime("%Y-%m-%dT%H:%M:%S%z")})


def _finish(bundle: ReportBundle, t0: float) -> ReportBundle:
    bundle.timestamp["wall_time_s"] = round(time.perf_counter() - t0, 3)
    return bundle


def run_verify(cfg: ExperimentConfig, jobs: int = 1) -> ReportBundle:
    """Contract checks, the lemma chain, the PBE bound and the norm equivalences, in that order."""
    t0 = time.perf_counter()
    alg = build_algebra(cfg)
    L = build_lengths(cfg, alg)
    bundle = _start(cfg, alg, L)
    R = bundle.reports
    R += contract_checks(alg, cfg, L, jobs)
    R += block_product_checks(alg, cfg, L, jobs)
    R += stage_bound_checks(alg, cfg, L, jobs)
    R += submultiplicative_checks(alg, cfg, L, jobs)
    R += tail_checks(alg, cfg, L, jobs)
    R += head_exponential_checks(alg, cfg, L, jobs)
    R += head_tail_checks(alg, cfg, L, jobs)
    R += trotter_checks(alg, cfg, L, jobs)
    pbe = pbe_checks(alg, cfg, L)
    if isinstance(pbe, PBEReport):
        bundle.pbe.append(pbe)
        R += pbe.rows
    else:
        R.append(pbe)
    R += equivalence_checks(alg, cfg, L, jobs)
    if isinstance(alg, bd.BDAlgebra):
        R += leibniz_checks(alg, cfg, L, jobs=jobs)
        R += bracket_checks(alg, cfg, L, jobs)
    return _finish(bundle, t0)


def run_pbe(cfg: ExperimentConfig, jobs: int = 1) -> ReportBundle:
    t0 = time.perf_counter()
    alg = build_algebra(cfg)
    L = build_lengths(cfg, alg)
    bundle = _start(cfg, alg, L)
    pbe = pbe_checks(alg, cfg, L)
    if isinstance(pbe, PBEReport):
        bundle.pbe.append(pbe)
        bundle.reports += pbe.rows
    else:
        bundle.reports.append(pbe)
    return _finish(bundle, t0)


def run_equiv(cfg: ExperimentConfig, jobs: int = 1) -> ReportBundle:
    t0 = time.perf_counter()
    alg = build_algebra(cfg)
    L = build_lengths(cfg, alg)
    bundle = _start(cfg, alg, L)
    bundle.reports += equivalence_checks(alg, cfg, L, jobs)
    return _finish(bundle, t0)


# ---------------------------------------------------------------- elements on disk


def deserialize(alg: FilteredAlgebra, data) -> Any:
    """Element from its JSON form: the per-module record format."""
    S = alg.scale
    if isinstance(alg, SequenceAlgebra):
        return SequenceElement(np.array([complex(re, im) for re, im in data]))
    if isinstance(alg, odo.OdometerAlgebra):
        return odo.from_records(data, S)
    if isinstance(alg, sd.DihedralAlgebra):
        return sd.from_records(data, S)
    if isinstance(alg, bd.BDAlgebra):
        return bd.from_records(data, S)
    return uhf.from_records(data, S)


def decompose(cfg: ExperimentConfig, element_data) -> dict:
    """Block norms and the RD-norm table ``N = 0..n_max`` of a serialized element."""
    alg = build_algebra(cfg)
    L = build_lengths(cfg, alg)
    bv = block_decompose(alg, deserialize(alg, element_data), check=True)
    table = rd_norm_table(bv, cfg.n_max, L)
    return {"stage": bv.stage, "block_norms": [float(x) for x in bv.block_norms],
            "rd_norms": list(table.values), "diagnostics": bv.diagnostics, "approx": alg.approx}


# ---------------------------------------------------------------- output


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return _clean(x.item())
    return x


def to_json(bundle: ReportBundle) -> str:
    return json.dumps(_clean(bundle.payload()), indent=2, sort_keys=True) + "\n"


def to_csv(bundle: ReportBundle) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in bundle.reports:
        params = json.dumps(_clean(dict(sorted(r.params.items()))), sort_keys=True, separators=(",", ":"))
        status = "skip" if r.skipped else ("pass" if r.passed else "fail")
        w.writerow([r.check, params, repr(r.lhs), repr(r.rhs), repr(r.margin), status,
                    "grid" if r.approx else "exact"])
    return buf.getvalue()


def emit(bundle: ReportBundle, out_dir: str | Path, fmt: str = "both", stem: str = "report") -> list[Path]:
    if fmt not in ("json", "csv", "both"):
        raise ValueError("format must be json, csv or both")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        p = out / f"{stem}.json"
        p.write_text(to_json(bundle))
        written.append(p)
    if fmt in ("csv", "both"):
        p = out / f"{stem}.csv"
        p.write_text(to_csv(bundle))
        written.append(p)
    return written
