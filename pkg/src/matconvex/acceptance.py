"""Bundled acceptance suite, run by ``matconvex selftest`` and the test suite.

Each criterion returns ``(passed, detail)``.  Tolerances live in
``TOLERANCES`` so a deliberately broken value can be injected to check that
the suite reports failure.
"""

from __future__ import annotations

import json
import math
import time
from typing import Callable

import numpy as np

from .calculus import Witness, replay_trial
from .criteria import (Kind, antiderivative_convexity, classify_power, derivative_matrix,
                       grid_classify, kraus_matrix, perturbation_certificate,
                       power_convex_det, power_monotone_det, power_spec,
                       sign_pattern_check, whole_line_rigidity_scan)
from .expr import Interval, parse
from .jets import derivative, finite_difference_oracle
from .linalg import Classification, DEFAULT_TOL
from .polylab import Target, construct_strict_polynomial, gap_polynomial_search, verify_strict
from .report import EXIT_DISAGREE, run_classify, run_gap_search

TOLERANCES = {
    "psd": DEFAULT_TOL,
    "closed_form": 1e-9,
    "kraus_exp": 1e-10,
    "sign": 1e-10,
    "jet_vs_fd": 1e-6,
    "gap_eigenvalue": 1e-6,
}

POWERS = (-1.5, -1.0, -0.5, 0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)

SUITE = {
    "x^2": "x^2 on (0.1, 4)",
    "x^3": "x^3 on (0.1, 4)",
    "x^0.5": "x^0.5 on (0.1, 4)",
    "-1/x": "-1/x on (0.1, 4)",
    "log(1+x)": "log(1 + x) on (0.1, 4)",
    "exp(x)": "exp(x) on (0.1, 4)",
    "x/(1+x)": "x/(1 + x) on (0.1, 4)",
    "x-log(1+x)": "x - log(1 + x) on (0.1, 4)",
}

CONSISTENCY_SEED = 7
GAP_SEED = 0


def _expected_power(p: float) -> tuple[bool, bool]:
    return 0.0 <= p <= 1.0, (-1.0 <= p <= 0.0) or (1.0 <= p <= 2.0)


def criterion_power_sweep() -> tuple[bool, str]:
    bad = []
    for p in POWERS:
        want = _expected_power(p)
        v = classify_power(p)
        f = power_spec(p, Interval(0.5, 2.0))
        grid = (grid_classify(f, 2, Kind.MONOTONE, tol=TOLERANCES["psd"]).passed,
                grid_classify(f, 2, Kind.CONVEX, tol=TOLERANCES["psd"]).passed)
        if (v.is_2monotone, v.is_2convex) != want or grid != want:
            bad.append(p)
    return not bad, f"{len(POWERS)} exponents, mismatches: {bad or 'none'}"


def criterion_closed_form(samples: int = 50, seed: int = 2024) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        p = float(rng.uniform(-2.0, 3.0))
        t = float(rng.uniform(0.5, 2.0))
        f = power_spec(p, Interval(0.25, 4.0))
        for kind, closed in ((Kind.MONOTONE, power_monotone_det), (Kind.CONVEX, power_convex_det)):
            c = closed(p, t)
            err = abs(derivative_matrix(f, t, 2, kind).det - c) / max(1.0, abs(c))
            worst = max(worst, err)
    return worst <= TOLERANCES["closed_form"], f"worst scaled error {worst:.3g} over {samples} draws"


def _consistency_reports(seed: int = CONSISTENCY_SEED):
    out = {}
    for name, text in SUITE.items():
        for kind in ("monotone", "convex"):
            out[name, kind] = run_classify(text, 2, kind, grid=129, trials=1000, seed=seed,
                                           tol=TOLERANCES["psd"], node_sets=20)
    return out


def criterion_consistency() -> tuple[bool, str]:
    reports = _consistency_reports()
    disagree = [f"{n}/{k}" for (n, k), (code, _) in reports.items() if code == EXIT_DISAGREE]
    notes = []
    ok = not disagree
    for name in ("x^3", "exp(x)"):
        code, rep = reports[name, "convex"]
        f = parse(SUITE[name])
        if set(rep.verdicts.values()) != {"FAIL", "REFUTED"} or not rep.witnesses:
            ok = False
            notes.append(f"{name} not refuted")
            continue
        w = Witness.from_dict(rep.witnesses[0])
        direct = w.replay(f)
        regenerated = replay_trial(f, w, window=f.domain)
        if not (direct < -w.tolerance and math.isclose(regenerated, w.gap_min_eigenvalue,
                                                       rel_tol=1e-9, abs_tol=1e-12)):
            ok = False
            notes.append(f"{name} witness does not replay")
    f = parse(SUITE["exp(x)"])
    worst = 0.0
    for t in np.linspace(0.2, 3.9, 10):
        want = -math.exp(2 * t) / 144.0
        got = kraus_matrix(f, float(t), 2).det
        worst = max(worst, abs(got - want) / abs(want))
    if worst > TOLERANCES["kraus_exp"]:
        ok = False
    notes.append(f"exp Kraus det rel err {worst:.2g}")
    return ok, (f"{len(reports)} runs, disagreements: {disagree or 'none'}; " + "; ".join(notes))


def criterion_sign_patterns() -> tuple[bool, str]:
    tol = TOLERANCES["sign"]
    cases = [(t, Kind.MONOTONE) for t in ("-1/x", "x^0.5", "log(1 + x)", "x/(1 + x)")]
    cases += [(t, Kind.CONVEX) for t in ("x^2", "x - log(1 + x)")]
    failed = []
    total = 0
    for text, kind in cases:
        f = parse(f"{text} on (0, inf)")
        for n in (2, 3):
            r = sign_pattern_check(f, n, kind, tol=tol)
            total += len(r.checks)
            if not r.passed:
                failed.append(f"{text} n={n}")
    return not failed, f"{total} sign checks, failures: {failed or 'none'}"


def criterion_antiderivative() -> tuple[bool, str]:
    failed = []
    for text in ("x/(1 + x) on (0.1, 4)", "x^0.5 on (0.1, 4)", "1 on (0.1, 4)"):
        r = antiderivative_convexity(parse(text), 129, TOLERANCES["psd"])
        if not r.passed:
            failed.append(text)
    return not failed, f"3 functions at 129 points, failures: {failed or 'none'}"


def criterion_rigidity() -> tuple[bool, str]:
    tol = TOLERANCES["psd"]
    exp_r = whole_line_rigidity_scan(parse("exp(x)"), Kind.CONVEX, 20, tol=tol)
    ok = exp_r.found and exp_r.witness_radius <= 1.0
    msgs = [f"exp witness radius {exp_r.witness_radius}"]
    for text in ("2*x + 1", "x^2 - 3*x + 2"):
        r = whole_line_rigidity_scan(parse(text), Kind.CONVEX, 20, tol=tol)
        reached = r.history[-1][0]
        ok &= (not r.found) and reached == 2.0 ** 20
        msgs.append(f"{text}: {'witness' if r.found else 'none'} to R={reached:g}")
    cube = whole_line_rigidity_scan(parse("x^3"), Kind.MONOTONE, 20, tol=tol)
    ok &= cube.found
    msgs.append(f"x^3 monotone witness at t={cube.witness_t}")
    return bool(ok), "; ".join(msgs)


def criterion_jet_accuracy(points: int = 25) -> tuple[bool, str]:
    worst = 0.0
    where = None
    for text in SUITE.values():
        f = parse(text)
        for t in np.linspace(0.15, 3.95, points):
            t = float(t)
            for k in range(7):
                exact = derivative(f, t, k)
                approx = finite_difference_oracle(f, t, k, h=1e-4, dps=50)
                # identically zero derivatives have no relative error; use absolute
                err = abs(exact - approx) / abs(exact) if exact else abs(approx)
                if err > worst:
                    worst, where = err, (f.label, t, k)
    return worst <= TOLERANCES["jet_vs_fd"], f"worst relative error {worst:.3g} at {where}"


def criterion_perturbation() -> tuple[bool, str]:
    iv = Interval(-1.0, 1.0)
    g = construct_strict_polynomial(2, 4, iv, Target.CONVEX_MONOTONE, seed=0).to_spec()
    f = parse("x^2 on (-1, 1)")
    cert = perturbation_certificate(f, g, 0.0, 2, TOLERANCES["psd"])
    positive = all(d > 0 for _, minors in cert.epsilon_samples for d in minors)
    boundary = cert.limit_verdict.classification is Classification.BOUNDARY_PSD
    ok = cert.eta > 0 and positive and boundary
    return ok, (f"eta={cert.eta:g}, {len(cert.epsilon_samples)} rungs positive={positive}, "
                f"limit {cert.limit_verdict.classification.value}")


def criterion_constructions() -> tuple[bool, str]:
    iv = Interval(-1.0, 1.0)
    msgs = []
    ok = True
    for n, m in ((1, 2), (1, 5), (2, 4), (2, 6)):
        p = construct_strict_polynomial(n, m, iv, Target.CONVEX_MONOTONE, seed=0,
                                        tol=TOLERANCES["psd"])
        check = verify_strict(p, n, Target.CONVEX_MONOTONE, 129, TOLERANCES["psd"])
        ok &= p.degree == m and check.passed
        msgs.append(f"({n},{m}) degree {p.degree} {'strict' if check.passed else 'NOT strict'}")
    return bool(ok), "; ".join(msgs)


def criterion_gap_search() -> tuple[bool, str]:
    cert = gap_polynomial_search(1, Interval(0.1, 2.0), 3, seed=GAP_SEED, max_seconds=90.0,
                                 tol=TOLERANCES["psd"])
    indefinite = cert.fail_verdict.classification is Classification.INDEFINITE
    w = cert.fail_witness
    ok = (indefinite and w.A.shape == (2, 2)
          and w.gap_min_eigenvalue < -TOLERANCES["gap_eigenvalue"] and cert.replay())
    return ok, (f"p = {cert.polynomial.coefficients}; Kraus {cert.fail_verdict.classification.value} "
                f"at t={cert.fail_point:.4g}; 2x2 gap eigenvalue {w.gap_min_eigenvalue:.3g}")


def criterion_determinism() -> tuple[bool, str]:
    def consistency_json():
        return [rep.to_json(include_wall_time=False)
                for _, rep in _consistency_reports().values()]

    def gap_json():
        return run_gap_search(1, 3, Interval(0.1, 2.0), seed=GAP_SEED, max_seconds=90.0,
                              tol=TOLERANCES["psd"])[1].to_json(include_wall_time=False)

    same_c = consistency_json() == consistency_json()
    same_g = gap_json() == gap_json()
    return same_c and same_g, f"consistency reports identical={same_c}; gap report identical={same_g}"


CRITERIA: dict[int, tuple[str, Callable[[], tuple[bool, str]]]] = {
    1: ("power classification boundary sweep", criterion_power_sweep),
    2: ("closed-form determinants vs jets", criterion_closed_form),
    3: ("cross-criterion consistency", criterion_consistency),
    4: ("half-line sign patterns", criterion_sign_patterns),
    5: ("antiderivative convexity", criterion_antiderivative),
    6: ("whole-line rigidity", criterion_rigidity),
    7: ("jet accuracy vs finite differences", criterion_jet_accuracy),
    8: ("perturbation certificate", criterion_perturbation),
    9: ("strict constructions", criterion_constructions),
    10: ("gap polynomial search", criterion_gap_search),
    11: ("determinism", criterion_determinism),
}


def run_criterion(number: int) -> dict:
    name, fn = CRITERIA[number]
    start = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crash is a failure, not an abort of the suite
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return {"criterion": number, "name": name, "passed": bool(passed), "detail": detail,
            "seconds": round(time.perf_counter() - start, 2)}


def run_selftest(only=None, as_json: bool = False) -> int:
    numbers = sorted(only) if only else sorted(CRITERIA)
    results = []
    for k in numbers:
        if k not in CRITERIA:
            raise SystemExit(f"unknown criterion {k}")
        r = run_criterion(k)
        results.append(r)
        if not as_json:
            mark = "PASS" if r["passed"] else "FAIL"
            print(f"[{mark}] {k:2d}. {r['name']} ({r['seconds']:.1f}s): {r['detail']}", flush=True)
    ok = all(r["passed"] for r in results)
    if as_json:
        print(json.dumps({"passed": ok, "results": results}, indent=2))
    return 0 if ok else 1
