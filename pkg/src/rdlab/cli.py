"""Command line: ``rdlab {verify,pbe,equiv,decompose}``.

Exit status is 0 when every non-skipped check passes, 1 when some check
fails and 2 on invalid input.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .experiments import decompose, emit, load_config, run_equiv, run_pbe, run_verify

log = logging.getLogger("rdlab")

RUNNERS = {"verify": run_verify, "pbe": run_pbe, "equiv": run_equiv}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML experiment config (defaults when omitted)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for sample-level checks")
    common.add_argument("--out", metavar="DIR", default=".", help="directory for report files")
    common.add_argument("--format", choices=("json", "csv", "both"), default="both")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="rdlab", description="Rapid-decay norm checks on finite-stage algebras.")
    sub = p.add_subparsers(dest="verb", required=True)
    sub.add_parser("verify", parents=[common], help="contract checks, lemma chain, PBE bound, equivalences")
    sub.add_parser("pbe", parents=[common], help="growth table of ||exp(ita)||_N against the PBE bound")
    sub.add_parser("equiv", parents=[common], help="norm equivalences for the selected algebra")
    d = sub.add_parser("decompose", parents=[common], help="block norms and RD-norm table of an element")
    d.add_argument("element", metavar="ELEMENT_JSON", help="serialized element in the algebra's record format")
    return p


def _print_summary(bundle) -> None:
    for name, d in bundle.summary()["checks"].items():
        worst = "n/a" if d["worst_margin"] is None else f"{d['worst_margin']:.3e}"
        line = f"{name:28s} pass {d['passed']:5d}  fail {d['failed']:5d}  skip {d['skipped']:5d}  worst margin {worst}"
        if "empirical_constant" in d:
            line += f"  empirical constant {d['empirical_constant']:.4f}"
        print(line)
    for p in bundle.pbe:
        print(f"pbe N={p.N}: fitted slope {p.slope:.3f} (bound exponent {p.exponent})")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, seed=args.seed)
    except (OSError, ValueError) as exc:
        print(f"rdlab: invalid config: {exc}", file=sys.stderr)
        return 2
    if args.jobs < 1:
        print("rdlab: --jobs must be >= 1", file=sys.stderr)
        return 2

    if args.verb == "decompose":
        try:
            with open(args.element) as fh:
                data = json.load(fh)
            result = decompose(cfg, data)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            print(f"rdlab: cannot decompose element: {exc}", file=sys.stderr)
            return 2
        print(json.dumps(result, indent=2, sort_keys=True))
        return 0

    try:
        bundle = RUNNERS[args.verb](cfg, jobs=args.jobs)
    except ValueError as exc:
        print(f"rdlab: {exc}", file=sys.stderr)
        return 2
    for path in emit(bundle, args.out, args.format, stem=args.verb):
        log.info("wrote %s", path)
    _print_summary(bundle)
    return 0 if bundle.passed else 1


if __name__ == "__main__":
    sys.exit(main())
