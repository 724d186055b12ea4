"""Command-line front end: ``matconvex <command> ...``.

Exit codes: 0 consistent pass, 1 consistent refutation, 2 criteria disagree,
3 input error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import __version__
from .errors import MatConvexError, SearchExhausted
from .linalg import DEFAULT_TOL
from .report import (EXIT_INPUT, EXIT_REFUTED, Report, run_classify,
                     run_construct, run_gap_search, run_power, run_scan_line)


def _default_seed() -> int:
    raw = os.environ.get("MATCONVEX_SEED", "0")
    try:
        return _u64(raw)
    except (ValueError, argparse.ArgumentTypeError):
        print(f"error: MATCONVEX_SEED must be an unsigned 64-bit integer, got {raw!r}",
              file=sys.stderr)
        raise SystemExit(EXIT_INPUT) from None


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _common(p: argparse.ArgumentParser, seed=True, grid=True, trials=False):
    p.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative PSD tolerance")
    if seed:
        p.add_argument("--seed", type=_u64, default=None,
                       help="RNG seed (default: $MATCONVEX_SEED or 0)")
    if grid:
        p.add_argument("--grid", type=int, default=129, help="interior grid size")
    if trials:
        p.add_argument("--trials", type=int, default=1000, help="random matrix trials")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _glue_intervals(argv: list[str]) -> list[str]:
    """Let ``--interval -1,1`` through; argparse would read -1,1 as a flag."""
    out = []
    it = iter(argv)
    for a in it:
        if a == "--interval":
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="matconvex", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"matconvex {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="run all three criteria on a function")
    p.add_argument("function", help='e.g. "x^0.5 on (0.1,9)"')
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--kind", choices=["monotone", "convex", "concave"], default="convex")
    p.add_argument("--node-sets", type=int, default=20)
    _common(p, trials=True)

    p = sub.add_parser("power", help="closed-form analysis of t^p")
    p.add_argument("p", type=float)
    p.add_argument("--t-lo", type=float, default=0.5)
    p.add_argument("--t-hi", type=float, default=2.0)
    p.add_argument("--points", type=int, default=9)
    _common(p, seed=False)

    p = sub.add_parser("scan-line", help="whole-line rigidity scan")
    p.add_argument("function")
    p.add_argument("--kind", choices=["monotone", "convex"], default="convex")
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--csv", metavar="PATH", help="write (R, worst minor) rows")
    _common(p, seed=False, grid=False)

    p = sub.add_parser("construct", help="strictly n-monotone and n-convex/concave polynomial")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--interval", required=True, help="a,b")
    p.add_argument("--target", choices=["convex-monotone", "concave-monotone"],
                   default="convex-monotone")
    p.add_argument("--budget", type=int, default=10_000)
    _common(p)

    p = sub.add_parser("gap-search", help="polynomial n-convex but not (n+1)-convex")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--interval", required=True, help="a,b")
    p.add_argument("--max-seconds", type=float, default=60.0)
    _common(p, trials=True)
    p.set_defaults(trials=500)

    p = sub.add_parser("selftest", help="run the bundled acceptance suite")
    p.add_argument("--json", action="store_true", help="print machine-readable results")
    p.add_argument("--only", nargs="*", type=int, help="criterion numbers to run")
    return parser


def _print_verdict(v: dict, indent: str = "  ") -> None:
    minors = ", ".join(f"D{i + 1}={d:.6g}" for i, d in enumerate(v["minors"]))
    print(f"{indent}{v['classification']}: min eigenvalue {v['min_eigenvalue']:.6g}; {minors}")


def _summary(report: Report, code: int) -> None:
    r = report
    head = f"{r.command}: {r.function or ''}"
    if r.n is not None:
        head += f"  n={r.n}"
    if r.kind:
        head += f"  kind={r.kind}"
    print(head)
    for name, value in r.verdicts.items():
        print(f"  {name:20s} {value}")
    if r.command == "classify":
        w = r.worst_points["derivative"]
        print(f"  worst grid point t = {w['worst_t']:.6g}")
        _print_verdict(w["worst"], "    ")
    elif r.command == "power":
        for row in r.details["table"]:
            print(f"  t={row['t']:.4g}  monotone det {row['monotone_det']:.6g}  "
                  f"convex det {row['convex_det']:.6g}")
        print(f"  max relative jet error {r.details['max_relative_jet_error']:.3g}")
    elif r.command == "scan-line":
        rig = r.worst_points["rigidity"]
        if rig["found"]:
            print(f"  witness at t = {rig['witness_t']:.6g} (radius {rig['witness_radius']:g})")
            _print_verdict(rig["witness"], "    ")
        else:
            print(f"  no witness up to radius {rig['history'][-1][0]:g}")
    elif r.command == "construct":
        print("  coefficients:", r.details["polynomial"]["coefficients"])
        ver = r.details["verification"]
        print(f"  worst monotone minor margin {ver['worst_monotone_minor']:.6g}, "
              f"worst convex minor margin {ver['worst_convex_minor']:.6g} "
              f"on {ver['points']} points")
    elif r.command == "gap-search":
        cert = r.details["certificate"]
        print("  coefficients:", cert["polynomial"]["coefficients"])
        fail = cert["fail_evidence"]
        print(f"  order {r.n + 1} indefinite at t = {fail['indefinite_t']:.6g}")
        _print_verdict(fail["indefinite_verdict"], "    ")
    for w in r.witnesses:
        lam = "" if w["lambda"] is None else f", lambda = {w['lambda']:.6g}"
        print(f"  witness: gap eigenvalue {w['gap_min_eigenvalue']:.6g}{lam} "
              f"(seed {w['seed']}, trial {w['trial']})")
    print(f"  exit {code}")


def _emit_json(report: Report, dest: str | None) -> None:
    if not dest:
        return
    text = report.to_json()
    if dest == "-":
        print(text)
    else:
        Path(dest).write_text(text + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_intervals(list(sys.argv[1:] if argv is None else argv)))
    if args.command == "selftest":
        from .acceptance import run_selftest
        return run_selftest(args.only, as_json=args.json)

    seed = getattr(args, "seed", None)
    if seed is None and hasattr(args, "seed"):
        seed = _default_seed()
    try:
        if args.command == "classify":
            code, report = run_classify(args.function, args.n, args.kind, args.grid,
                                        args.trials, seed, args.tol, args.node_sets)
        elif args.command == "power":
            code, report = run_power(args.p, args.t_lo, args.t_hi, args.points,
                                     args.grid, args.tol)
        elif args.command == "scan-line":
            code, report = run_scan_line(args.function, args.kind, args.steps, args.tol)
            if args.csv:
                with open(args.csv, "w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(["radius", "worst_minor", "worst_min_eigenvalue"])
                    w.writerows(report.worst_points["rigidity"]["history"])
        elif args.command == "construct":
            code, report = run_construct(args.n, args.m, args.interval, args.target, seed,
                                         args.budget, args.grid, args.tol)
        else:
            code, report = run_gap_search(args.n, args.degree, args.interval, seed,
                                          args.trials, args.max_seconds, grid=args.grid,
                                          tol=args.tol)
    except SearchExhausted as exc:
        print(f"search exhausted: {exc}", file=sys.stderr)
        if exc.best is not None:
            print(f"  best candidate: {list(exc.best.coefficients)}; worst score {exc.worst_minor}",
                  file=sys.stderr)
        return EXIT_REFUTED
    except (MatConvexError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.json != "-":
        _summary(report, code)
    _emit_json(report, args.json)
    return code


if __name__ == "__main__":
    sys.exit(main())
