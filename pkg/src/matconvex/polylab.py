"""Polynomials that are strictly n-monotone and strictly n-convex/concave, and
search for polynomials that are n-convex but not (n+1)-convex."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .calculus import DefinitionalResult, Witness, definitional_test
from .criteria import GridReport, Kind, derivative_matrix, grid_classify
from .errors import PreconditionError, SearchExhausted
from .expr import FunctionSpec, Interval, Poly, interior_grid
from .jets import taylor_shift
from .linalg import DEFAULT_TOL, PsdVerdict, leading_minors, psd_test

VERIFY_GRID = 129


class Target(str, Enum):
    CONCAVE_MONOTONE = "concave-monotone"
    CONVEX_MONOTONE = "convex-monotone"

    @classmethod
    def parse(cls, value) -> "Target":
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("_", "-")
        aliases = {"concavemonotone": "concave-monotone", "convexmonotone": "convex-monotone"}
        return cls(aliases.get(v, v))


@dataclass(frozen=True)
class Polynomial:
    coefficients: tuple
    interval: Interval

    def __post_init__(self):
        cs = tuple(self.coefficients)
        if not cs:
            raise ValueError("polynomial needs at least one coefficient")
        if len(cs) > 1 and cs[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")
        object.__setattr__(self, "coefficients", cs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for c in self.coefficients)

    def derivative_coefficients(self, k: int = 1) -> tuple:
        cs = list(self.coefficients)
        for _ in range(k):
            cs = [i * cs[i] for i in range(1, len(cs))] or [0]
        return tuple(cs)

    def to_spec(self) -> FunctionSpec:
        return FunctionSpec(Poly(tuple(float(c) for c in self.coefficients)), self.interval)

    def to_dict(self) -> dict:
        return {"coefficients": [float(c) for c in self.coefficients],
                "degree": self.degree, "interval": [self.interval.lo, self.interval.hi]}


def poly_eval_derivatives(p: Polynomial, t, k: int) -> list:
    """f(t), f'(t), ..., f^(k)(t) by repeated synthetic division.

    Exact when the coefficients and ``t`` are ints or Fractions.
    """
    if k > p.degree + 2:
        raise PreconditionError(f"k = {k} exceeds degree + 2 = {p.degree + 2}")
    exact = p.exact and isinstance(t, (int, Fraction))
    c = list(p.coefficients) if exact else [float(x) for x in p.coefficients]
    x = t if exact else float(t)
    taylor = []
    while c:
        acc = c[-1]
        quotient = [acc]
        for ci in reversed(c[:-1]):
            acc = acc * x + ci
            quotient.append(acc)
        taylor.append(quotient.pop())
        c = list(reversed(quotient))
    zero = Fraction(0) if exact else 0.0
    taylor += [zero] * (k + 1 - len(taylor))
    return [math.factorial(j) * taylor[j] for j in range(k + 1)]


# --------------------------------------------------------------------------
# Strict constructions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StrictnessReport:
    n: int
    target: Target
    points: int
    worst_monotone_minor: float
    worst_convex_minor: float
    passed: bool

    def to_dict(self) -> dict:
        return {"n": self.n, "target": self.target.value, "points": self.points,
                "worst_monotone_minor": self.worst_monotone_minor,
                "worst_convex_minor": self.worst_convex_minor, "passed": self.passed}


def _scaled_minor_margin(entries: np.ndarray, tol: float) -> float:
    """Smallest leading minor minus its threshold tol * max(1, ||M||_inf)."""
    threshold = tol * max(1.0, float(np.abs(entries).sum(axis=1).max()))
    return min(float(d) for d in leading_minors(entries.tolist())) - threshold


def verify_strict(p: Polynomial, n: int, target, grid_size: int = VERIFY_GRID,
                  tol: float = DEFAULT_TOL) -> StrictnessReport:
    """Check every leading minor of the monotonicity matrix and of the Kraus
    matrix of f (convex target) or -f (concave target) on the grid."""
    target = Target.parse(target)
    f = p.to_spec()
    sign = 1.0 if target is Target.CONVEX_MONOTONE else -1.0
    worst_m = worst_c = math.inf
    for t in interior_grid(p.interval, grid_size):
        mono = derivative_matrix(f, float(t), n, Kind.MONOTONE).entries
        conv = sign * derivative_matrix(f, float(t), n, Kind.CONVEX).entries
        worst_m = min(worst_m, _scaled_minor_margin(mono, tol))
        worst_c = min(worst_c, _scaled_minor_margin(conv, tol))
    return StrictnessReport(n, target, grid_size, worst_m, worst_c, worst_m > 0 and worst_c > 0)


def _germ_coefficients(mid: float, s: float, m: int, convex: bool) -> np.ndarray:
    """Degree-m Taylor truncation in u = t - mid of (mid + u) / (1 -+ s u)."""
    r = s if convex else -s
    k = np.arange(m + 1)
    c = mid * r ** k
    c[1:] += r ** (k[1:] - 1)
    return c


def _candidate(n: int, m: int, interval: Interval, target: Target,
               rng: np.random.Generator) -> np.ndarray | None:
    mid = interval.midpoint
    half = 0.5 * (interval.hi - interval.lo)
    convex = target is Target.CONVEX_MONOTONE
    terms = n + int(rng.integers(0, 3))
    # pole distance: the truncation error shrinks with s, the determinant
    # margin with the spread of the s_j, so both are drawn on a log scale
    top_s = 0.9 * 10.0 ** -rng.uniform(0.0, 2.5) / half
    coeffs = np.zeros(m + 1)
    for s in np.exp(rng.uniform(math.log(top_s / 8), math.log(top_s), size=terms)):
        # the germ must be increasing on the interval
        if (convex and mid + 1.0 / s <= 0) or (not convex and 1.0 / s <= mid):
            return None
        coeffs += rng.lognormal(0.0, 1.0) * _germ_coefficients(mid, s, m, convex)
    # scale so the Hankel entries at the midpoint are at least 1
    floor = np.abs(coeffs[1:2 * n + 1]).min()
    if not np.isfinite(floor) or floor <= 0:
        return None
    coeffs /= floor
    coeffs[m] *= 1.0 + 1e-3
    # back from powers of (t - mid) to powers of t
    return taylor_shift(coeffs, -mid)


def construct_strict_polynomial(n: int, m: int, interval: Interval, target,
                                seed: int = 0, budget: int = 10_000,
                                grid_size: int = VERIFY_GRID,
                                tol: float = DEFAULT_TOL) -> Polynomial:
    """Degree-m polynomial that is strictly n-monotone and strictly n-convex
    (or n-concave) on the verification grid of ``interval``.

    Candidates are positive combinations of truncated Moebius germs, which are
    operator monotone and operator convex/concave before truncation; each
    candidate is verified and the search resamples on failure.
    """
    target = Target.parse(target)
    if m < 2 * n:
        raise PreconditionError(f"degree m = {m} must be at least 2n = {2 * n}")
    if n < 1 or n > 4:
        raise PreconditionError("order n must be between 1 and 4")
    if not interval.is_bounded:
        raise PreconditionError("construction needs a finite interval")
    rng = np.random.default_rng([int(seed), n, m])
    best, best_score = None, -math.inf
    for _ in range(budget):
        cs = _candidate(n, m, interval, target, rng)
        if cs is None or cs[m] == 0 or not np.all(np.isfinite(cs)):
            continue
        p = Polynomial(tuple(float(c) for c in cs), interval)
        report = verify_strict(p, n, target, grid_size, tol)
        if report.passed:
            return p
        score = min(report.worst_monotone_minor, report.worst_convex_minor)
        if score > best_score:
            best, best_score = p, score
    raise SearchExhausted(f"no strictly {n}-{target.value} polynomial of degree {m} "
                          f"found in {budget} candidates", best, best_score)


# --------------------------------------------------------------------------
# Gap search
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GapCertificate:
    polynomial: Polynomial
    n: int
    pass_grid: GridReport
    pass_definitional: DefinitionalResult
    fail_witness: Witness
    fail_point: float
    fail_verdict: PsdVerdict
    seed: int

    def replay(self, tol: float = DEFAULT_TOL) -> bool:
        """Re-run both evidence checks from the stored data."""
        f = self.polynomial.to_spec()
        grid = grid_classify(f, self.n, Kind.CONVEX, self.pass_grid.points, tol)
        gap = self.fail_witness.replay(f)
        point = psd_test(derivative_matrix(f, self.fail_point, self.n + 1, Kind.CONVEX), tol)
        return grid.passed and gap < -self.fail_witness.tolerance and not point.passes

    def to_dict(self) -> dict:
        return {
            "polynomial": self.polynomial.to_dict(),
            "n": self.n,
            "seed": self.seed,
            "pass_evidence": {"grid": self.pass_grid.to_dict(),
                              "definitional": self.pass_definitional.to_dict()},
            "fail_evidence": {"witness": self.fail_witness.to_dict(),
                              "indefinite_t": self.fail_point,
                              "indefinite_verdict": self.fail_verdict.to_dict()},
        }


def _grid_scores(f: FunctionSpec, n: int, grid: np.ndarray, tol: float):
    """(worst order-n score, worst order-(n+1) point, its verdict)."""
    worst_n = math.inf
    fail_t, fail_v = None, None
    for t in grid:
        t = float(t)
        v = psd_test(derivative_matrix(f, t, n, Kind.CONVEX), tol)
        worst_n = min(worst_n, v.score)
        w = psd_test(derivative_matrix(f, t, n + 1, Kind.CONVEX), tol)
        if not w.passes and (fail_v is None or w.score < fail_v.score):
            fail_t, fail_v = t, w
    return worst_n, fail_t, fail_v


def _seed_shapes(n: int, degree: int, interval: Interval, seed: int) -> list[np.ndarray]:
    """Starting coefficient vectors: odd-monomial dominants and strict convex
    constructions of the requested degree."""
    lo, hi = interval.lo, interval.hi
    shapes = []
    odd = degree if degree % 2 else degree - 1
    for anchor in (lo, lo - 0.5 * (hi - lo), 0.5 * (lo + hi)):
        # (t - anchor)^odd, plus a small t^degree term to pin the degree
        c = np.zeros(odd + 1)
        c[odd] = 1.0
        c = taylor_shift(c, -anchor)
        full = np.zeros(degree + 1)
        full[: c.size] = c
        if degree != odd:
            full[degree] = 1e-3
        shapes.append(full)
    try:
        p = construct_strict_polynomial(n, degree, interval, Target.CONVEX_MONOTONE,
                                        seed=seed, budget=200)
        base = np.array(p.coefficients, dtype=float)
        shapes.append(base)
        # a strict construction keeps its top coefficient tiny, which leaves
        # the order-(n+1) matrix within tolerance of PSD; inflating it breaks
        # order n+1 first because that matrix has a zero corner entry
        for fac in (1e4, 1e3, 1e5, 1e2):
            c = base.copy()
            c[-1] *= fac
            shapes.append(c)
    except (SearchExhausted, PreconditionError):
        pass
    if n > 1:
        # odd monomials rarely pass order n >= 2; try the constructions first
        shapes = shapes[3:] + shapes[:3]
    return shapes


def gap_polynomial_search(n: int, interval: Interval, degree: int, seed: int = 0,
                          trials: int = 500, max_evaluations: int = 50_000,
                          max_seconds: float = 60.0, grid_size: int = VERIFY_GRID,
                          tol: float = DEFAULT_TOL) -> GapCertificate:
    """Find a polynomial in K_n(I) but not in K_{n+1}(I).

    Coordinate descent on the coefficients raises the worst order-n score
    while an Indefinite order-(n+1) Kraus point is kept alive; a candidate is
    accepted once the order-n grid passes, the order-n random search finds
    nothing, and an (n+1) x (n+1) matrix witness is found.
    """
    if degree < 2 * n:
        raise PreconditionError(f"degree {degree} must be at least 2n = {2 * n}")
    if n < 1 or n > 3:
        raise PreconditionError("order n must be between 1 and 3")
    if not interval.is_bounded:
        raise PreconditionError("gap search needs a finite interval")
    start = time.monotonic()
    rng = np.random.default_rng([int(seed), 0x6A9, n, degree])
    grid = interior_grid(interval, grid_size)
    evaluations = 0
    best_poly, best_score = None, -math.inf

    def budget_left() -> bool:
        return evaluations < max_evaluations and time.monotonic() - start < max_seconds

    def score(cs: np.ndarray):
        nonlocal evaluations
        evaluations += 1
        if cs[-1] == 0:
            return -math.inf, None, None
        f = FunctionSpec(Poly(tuple(float(c) for c in cs)), interval)
        worst_n, fail_t, fail_v = _grid_scores(f, n, grid, tol)
        if fail_t is None:
            return -math.inf, None, None
        return worst_n, fail_t, fail_v

    queue = _seed_shapes(n, degree, interval, seed)
    restart = 0
    while budget_left():
        if queue:
            cs = queue.pop(0)
        else:
            base = best_poly if best_poly is not None else _seed_shapes(n, degree, interval, seed)[0]
            cs = np.array(base, dtype=float) * (1.0 + 0.3 * rng.standard_normal(degree + 1))
        restart += 1
        cur, fail_t, fail_v = score(cs)
        step = 0.25
        while budget_left() and cur < -tol and step > 1e-6:
            improved = False
            for i in range(degree + 1):
                for sgn in (1.0, -1.0):
                    trial = cs.copy()
                    trial[i] += sgn * step * max(abs(cs[i]), 1e-3)
                    val, ft, fv = score(trial)
                    if val > cur:
                        cs, cur, fail_t, fail_v, improved = trial, val, ft, fv, True
                if not budget_left():
                    break
            if not improved:
                step *= 0.5
        if cur > best_score:
            best_poly, best_score = cs.copy(), cur
        if cur < -tol or fail_t is None:
            continue
        poly = Polynomial(tuple(float(c) for c in cs), interval)
        f = poly.to_spec()
        pass_grid = grid_classify(f, n, Kind.CONVEX, grid_size, tol)
        if not pass_grid.passed:
            continue
        pass_def = definitional_test(f, n, Kind.CONVEX, trials, seed, tol)
        if pass_def.refuted:
            continue
        # unfocused first, then around the worst Kraus point and the ends
        for focus in (None, fail_t, interval.lo, interval.hi):
            fail_def = definitional_test(f, n + 1, Kind.CONVEX, trials, seed, tol, focus=focus)
            if fail_def.refuted:
                break
        if fail_def.refuted:
            return GapCertificate(poly, n, pass_grid, pass_def, fail_def.witness,
                                  fail_t, fail_v, int(seed))
    best = None if best_poly is None else Polynomial(tuple(float(c) for c in best_poly), interval)
    raise SearchExhausted(
        f"no certified gap polynomial of degree {degree} for n = {n} after "
        f"{evaluations} evaluations and {restart} restarts", best, best_score)
