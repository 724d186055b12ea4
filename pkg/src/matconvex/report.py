"""Report objects and the command runners behind the CLI.

Runners return ``(exit_code, Report)`` and never print; ``cli`` owns all
terminal and file output.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .calculus import definitional_test, divided_difference_test
from .criteria import (Kind, derivative_matrix, grid_classify, negated,
                       power_convex_det, power_cross_check, power_monotone_det,
                       power_spec, whole_line_rigidity_scan)
from .expr import FunctionSpec, Interval, parse, parse_interval
from .linalg import DEFAULT_TOL
from .polylab import (Target, construct_strict_polynomial, gap_polynomial_search,
                      verify_strict)

SCHEMA = 1

EXIT_PASS = 0
EXIT_REFUTED = 1
EXIT_DISAGREE = 2
EXIT_INPUT = 3


@dataclass
class Report:
    command: str
    function: str | None = None
    interval: str | None = None
    n: int | None = None
    kind: str | None = None
    seed: int | None = None
    verdicts: dict = field(default_factory=dict)
    worst_points: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    wall_time: float = 0.0
    tool_version: str = __version__
    schema: int = SCHEMA

    def to_dict(self, include_wall_time: bool = True) -> dict:
        d = _plain(asdict(self))
        if not include_wall_time:
            d.pop("wall_time")
        return d

    def to_json(self, include_wall_time: bool = True) -> str:
        return json.dumps(self.to_dict(include_wall_time), sort_keys=True, indent=2,
                          allow_nan=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))


def _plain(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and tuples to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def default_window(domain: Interval, width: float = 20.0) -> Interval:
    """Bounded sub-window used to draw random matrices on unbounded domains."""
    if domain.is_bounded:
        return domain
    if math.isfinite(domain.lo):
        return Interval(domain.lo, domain.lo + width)
    if math.isfinite(domain.hi):
        return Interval(domain.hi - width, domain.hi)
    return Interval(-0.5 * width, 0.5 * width)


# --------------------------------------------------------------------------
# classify
# --------------------------------------------------------------------------


def run_classify(text: str | FunctionSpec, n: int, kind: str, grid: int = 129,
                 trials: int = 1000, seed: int = 0, tol: float = DEFAULT_TOL,
                 node_sets: int = 20, window: Interval | None = None) -> tuple[int, Report]:
    start = time.perf_counter()
    f = parse(text) if isinstance(text, str) else text
    kind = str(kind).lower()
    if kind not in ("monotone", "convex", "concave"):
        raise ValueError(f"unknown kind {kind!r}")
    target = negated(f) if kind == "concave" else f
    k = Kind.MONOTONE if kind == "monotone" else Kind.CONVEX
    win = window or default_window(f.domain)

    g = grid_classify(target, n, k, grid, tol)
    d = definitional_test(target, n, k, trials, seed, tol, window=win)
    dd = divided_difference_test(target, n, k, node_sets, seed, tol, window=win)

    passes = [g.passed, not d.refuted, not dd.refuted]
    code = EXIT_PASS if all(passes) else EXIT_REFUTED if not any(passes) else EXIT_DISAGREE
    report = Report(
        command="classify", function=f.label, interval=str(f.domain), n=n, kind=kind,
        seed=seed,
        verdicts={"derivative": g.verdict, "definitional": d.verdict,
                  "divided_difference": dd.verdict},
        worst_points={"derivative": g.to_dict(), "divided_difference": dd.to_dict()},
        witnesses=[d.witness.to_dict()] if d.witness else [],
        details={"definitional": {k_: v for k_, v in d.to_dict().items() if k_ != "witness"},
                 "consistent": code != EXIT_DISAGREE, "grid": grid, "trials": trials,
                 "node_sets": node_sets, "tolerance": tol, "window": str(win)},
    )
    report.wall_time = time.perf_counter() - start
    return code, report


# --------------------------------------------------------------------------
# power
# --------------------------------------------------------------------------


def run_power(p: float, t_lo: float = 0.5, t_hi: float = 2.0, points: int = 9,
              grid: int = 129, tol: float = DEFAULT_TOL) -> tuple[int, Report]:
    start = time.perf_counter()
    iv = Interval(t_lo, t_hi)
    cross = power_cross_check(p, iv, grid, tol)
    f = power_spec(p, iv)
    rows = []
    worst = 0.0
    for t in np.linspace(t_lo, t_hi, points + 2)[1:-1]:
        t = float(t)
        cm, cc = power_monotone_det(p, t), power_convex_det(p, t)
        jm = derivative_matrix(f, t, 2, Kind.MONOTONE).det
        jc = derivative_matrix(f, t, 2, Kind.CONVEX).det
        err = max(abs(jm - cm) / max(1.0, abs(cm)), abs(jc - cc) / max(1.0, abs(cc)))
        worst = max(worst, err)
        rows.append({"t": t, "monotone_det": cm, "convex_det": cc,
                     "jet_monotone_det": jm, "jet_convex_det": jc})
    report = Report(
        command="power", function=f.label, interval=str(iv), n=2,
        verdicts={"is_2monotone": cross["is_2monotone"], "is_2convex": cross["is_2convex"],
                  "grid_monotone": cross["grid_monotone"],
                  "grid_convex": cross["grid_convex"]},
        details={"p": float(p), "table": rows, "max_relative_jet_error": worst,
                 "jets_agree": worst <= 1e-9,
                 "determinants_consistent": cross["determinants_consistent"],
                 "grid_consistent": cross["grid_consistent"]},
    )
    report.wall_time = time.perf_counter() - start
    ok = worst <= 1e-9 and cross["determinants_consistent"] and cross["grid_consistent"]
    return (EXIT_PASS if ok else EXIT_DISAGREE), report


# --------------------------------------------------------------------------
# scan-line
# --------------------------------------------------------------------------


def run_scan_line(text: str, kind: str, steps: int = 20,
                  tol: float = DEFAULT_TOL) -> tuple[int, Report]:
    start = time.perf_counter()
    f = parse(text)
    r = whole_line_rigidity_scan(f, kind, steps, tol=tol)
    report = Report(
        command="scan-line", function=f.label, interval=str(f.domain), n=2,
        kind=Kind.parse(kind).value,
        verdicts={"witness_found": r.found},
        worst_points={"rigidity": r.to_dict()},
        details={"steps": steps},
    )
    report.wall_time = time.perf_counter() - start
    return (EXIT_REFUTED if r.found else EXIT_PASS), report


# --------------------------------------------------------------------------
# construct / gap-search
# --------------------------------------------------------------------------


def run_construct(n: int, m: int, interval: str | Interval, target: str, seed: int = 0,
                  budget: int = 10_000, grid: int = 129,
                  tol: float = DEFAULT_TOL) -> tuple[int, Report]:
    start = time.perf_counter()
    iv = parse_interval(interval) if isinstance(interval, str) else interval
    tgt = Target.parse(target)
    p = construct_strict_polynomial(n, m, iv, tgt, seed, budget, grid, tol)
    check = verify_strict(p, n, tgt, grid, tol)
    report = Report(
        command="construct", function=p.to_spec().label, interval=str(iv), n=n,
        kind=tgt.value, seed=seed,
        verdicts={"strict": check.passed},
        details={"polynomial": p.to_dict(), "verification": check.to_dict()},
    )
    report.wall_time = time.perf_counter() - start
    return (EXIT_PASS if check.passed else EXIT_DISAGREE), report


def run_gap_search(n: int, degree: int, interval: str | Interval, seed: int = 0,
                   trials: int = 500, max_seconds: float = 60.0,
                   max_evaluations: int = 50_000, grid: int = 129,
                   tol: float = DEFAULT_TOL) -> tuple[int, Report]:
    start = time.perf_counter()
    iv = parse_interval(interval) if isinstance(interval, str) else interval
    cert = gap_polynomial_search(n, iv, degree, seed, trials, max_evaluations,
                                 max_seconds, grid, tol)
    replayed = cert.replay(tol)
    report = Report(
        command="gap-search", function=cert.polynomial.to_spec().label, interval=str(iv),
        n=n, kind="convex", seed=seed,
        verdicts={"order_n": "PASS", "order_n_plus_1": "REFUTED", "replayed": replayed},
        witnesses=[cert.fail_witness.to_dict()],
        details={"certificate": cert.to_dict()},
    )
    report.wall_time = time.perf_counter() - start
    return (EXIT_PASS if replayed else EXIT_DISAGREE), report
