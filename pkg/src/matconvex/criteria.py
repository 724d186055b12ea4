"""Differential criteria for matrix monotonicity and convexity of order n.

Both criteria look at Hankel matrices of normalized Taylor coefficients
a_k = f^(k)(t)/k!:

* monotonicity matrix, entries a_{i+j-1} (i, j = 1..n);
* Kraus matrix K_n(f; t), entries a_{i+j}.

A function is n-monotone (n-convex) only if the corresponding matrix is
positive semi-definite at every point of the interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import (DomainError, HypothesisError, InvalidPerturber,
                     NoPositiveWindow, NotMonotone, PositivityError)
from .expr import FunctionSpec, Interval, Neg, interior_grid
from .jets import antiderivative_jet, derivative_jet, jet_lift, series_pow
from .linalg import (DEFAULT_TOL, Classification, PsdVerdict, leading_minors,
                     psd_test)

DEFAULT_GRID = 129
SIGN_TOL = 1e-10


class Kind(str, Enum):
    MONOTONE = "monotone"
    CONVEX = "convex"

    @classmethod
    def parse(cls, value) -> "Kind":
        return value if isinstance(value, cls) else cls(str(value).lower())


def negated(f: FunctionSpec) -> FunctionSpec:
    """-f; n-concavity of f is n-convexity of this."""
    return FunctionSpec(Neg(f.expr), f.domain, f"-({f.label})")


# --------------------------------------------------------------------------
# Hankel matrices
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DerivativeMatrix:
    kind: Kind
    n: int
    base_point: float
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def det(self) -> float:
        return leading_minors(self.entries.tolist())[-1]


def hankel_from_coeffs(coeffs, n: int, offset: int) -> np.ndarray:
    """n x n matrix with 1-based entry (i, j) = coeffs[i + j - 2 + offset]."""
    idx = np.add.outer(np.arange(n), np.arange(n)) + offset
    return np.asarray(coeffs, dtype=float)[idx]


def _offset(kind: Kind) -> int:
    # entry(1,1) is a_1 (monotone) or a_2 (convex)
    return 1 if kind is Kind.MONOTONE else 2


def derivative_matrix(f: FunctionSpec, t: float, n: int, kind) -> DerivativeMatrix:
    kind = Kind.parse(kind)
    if n < 1:
        raise ValueError("order n must be at least 1")
    off = _offset(kind)
    jet = jet_lift(f, t, 2 * n - 2 + off)
    return DerivativeMatrix(kind, n, float(t), hankel_from_coeffs(jet.coeffs, n, off))


def kraus_matrix(f: FunctionSpec, t: float, n: int) -> DerivativeMatrix:
    return derivative_matrix(f, t, n, Kind.CONVEX)


def dobsch_matrix(f: FunctionSpec, t: float, n: int) -> DerivativeMatrix:
    return derivative_matrix(f, t, n, Kind.MONOTONE)


def strict_check(f: FunctionSpec, t: float, n: int, kind, tol: float = DEFAULT_TOL) -> bool:
    """True iff the full determinant of the kind-matrix exceeds ``tol`` at t."""
    return derivative_matrix(f, t, n, kind).det > tol


# --------------------------------------------------------------------------
# Perturbation certificate
# --------------------------------------------------------------------------

EPS_LADDER = tuple(2.0 ** -k for k in range(41))


@dataclass(frozen=True)
class PerturbationCertificate:
    t0: float
    n: int
    eta: float
    epsilon_samples: tuple
    limit_verdict: PsdVerdict

    def to_dict(self) -> dict:
        return {
            "t0": self.t0, "n": self.n, "eta": self.eta,
            "epsilon_samples": [[e, list(m)] for e, m in self.epsilon_samples],
            "limit_verdict": self.limit_verdict.to_dict(),
        }


def perturbation_certificate(f: FunctionSpec, g: FunctionSpec, t0: float, n: int,
                             tol: float = DEFAULT_TOL) -> PerturbationCertificate:
    """Certify K_n(f; t0) >= 0 as the limit of K_n(f + eps g; t0) > 0.

    ``g`` must have all leading minors of K_n(g; t0) positive.  Each minor of
    the perturbed matrix is a polynomial in eps; it is sampled on the ladder
    1, 1/2, ..., 2^-40 and eta is the largest rung below which every sampled
    minor stays positive.
    """
    kf = kraus_matrix(f, t0, n).entries
    kg = kraus_matrix(g, t0, n).entries
    g_minors = leading_minors(kg.tolist())
    threshold = tol * max(1.0, float(np.abs(kg).sum(axis=1).max()))
    if not all(d > threshold for d in g_minors):
        raise InvalidPerturber(
            f"perturber {g.label} is not strictly {n}-convex at {t0!r}: minors {g_minors}")
    rungs = []
    for eps in EPS_LADDER:
        minors = tuple(float(d) for d in leading_minors((kf + eps * kg).tolist()))
        rungs.append((eps, minors))
    ok = [all(d > 0 for d in m) for _, m in rungs]
    if not ok[-1]:
        raise NoPositiveWindow(
            f"K_{n}({f.label} + eps g; {t0!r}) has a negative minor even at eps = 2^-40: "
            f"{rungs[-1][1]}")
    first = len(rungs) - 1
    while first > 0 and ok[first - 1]:
        first -= 1
    eta = rungs[first][0]
    samples = tuple(r for r in rungs if r[0] <= eta)
    return PerturbationCertificate(float(t0), n, eta, samples, psd_test(kf, tol))


# --------------------------------------------------------------------------
# Grid scans
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridPoint:
    t: float
    verdict: PsdVerdict

    @property
    def score(self) -> float:
        return self.verdict.score


@dataclass(frozen=True)
class GridReport:
    label: str
    n: int
    kind: Kind
    points: int
    worst: GridPoint
    indefinite: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.indefinite

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        return {
            "function": self.label, "n": self.n, "kind": self.kind.value,
            "verdict": self.verdict, "points": self.points,
            "indefinite_points": len(self.indefinite),
            "worst_t": self.worst.t, "worst": self.worst.verdict.to_dict(),
        }


def _scan(label, n, kind, points: Iterable[float], build, tol) -> GridReport:
    worst = None
    bad = []
    count = 0
    for t in points:
        t = float(t)
        try:
            m = build(t)
        except DomainError as exc:
            raise DomainError(f"{exc}", t) from None
        gp = GridPoint(t, psd_test(m, tol))
        count += 1
        if gp.verdict.classification is Classification.INDEFINITE:
            bad.append(t)
        if worst is None or gp.score < worst.score:
            worst = gp
    return GridReport(label, n, Kind.parse(kind), count, worst, tuple(bad))


def grid_classify(f: FunctionSpec, n: int, kind, grid_size: int = DEFAULT_GRID,
                  tol: float = DEFAULT_TOL) -> GridReport:
    """PSD test of the order-n matrix at every interior Chebyshev grid point."""
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    kind = Kind.parse(kind)
    grid = interior_grid(f.domain, grid_size)
    return _scan(f.label, n, kind, grid,
                 lambda t: derivative_matrix(f, t, n, kind).entries, tol)


# --------------------------------------------------------------------------
# Powers t^p
# --------------------------------------------------------------------------


def power_monotone_det(p: float, t: float) -> float:
    """det of the 2x2 monotonicity matrix of t^p: -p^2 (p-1)(p+1) t^(2p-4) / 12."""
    return -(p * p) * (p - 1.0) * (p + 1.0) * t ** (2.0 * p - 4.0) / 12.0


def power_convex_det(p: float, t: float) -> float:
    """det of K_2(t^p; t): -p^2 (p-1)^2 (p-2)(p+1) t^(2p-6) / 144."""
    return -(p * p) * (p - 1.0) ** 2 * (p - 2.0) * (p + 1.0) * t ** (2.0 * p - 6.0) / 144.0


@dataclass(frozen=True)
class PowerVerdict:
    p: float
    is_2monotone: bool
    is_2convex: bool


def classify_power(p: float) -> PowerVerdict:
    return PowerVerdict(float(p), 0.0 <= p <= 1.0, -1.0 <= p <= 0.0 or 1.0 <= p <= 2.0)


def power_spec(p: float, domain: Interval) -> FunctionSpec:
    from .expr import Pow, Var
    return FunctionSpec(Pow(Var(), p), domain, f"x^{p!r} on {domain}")


def power_cross_check(p: float, interval: Interval = Interval(0.5, 2.0),
                      grid_size: int = DEFAULT_GRID, tol: float = DEFAULT_TOL) -> dict:
    """Compare the closed-form classification with determinants and grid scans."""
    v = classify_power(p)
    f = power_spec(p, interval)
    grid_mono = grid_classify(f, 2, Kind.MONOTONE, grid_size, tol)
    grid_conv = grid_classify(f, 2, Kind.CONVEX, grid_size, tol)
    det_m, det_c = power_monotone_det(p, 1.0), power_convex_det(p, 1.0)
    # a nonnegative determinant is necessary, not sufficient, for PSD
    det_ok = (not v.is_2monotone or det_m >= -tol) and (not v.is_2convex or det_c >= -tol)
    return {
        "p": v.p,
        "is_2monotone": v.is_2monotone,
        "is_2convex": v.is_2convex,
        "monotone_det_at_1": det_m,
        "convex_det_at_1": det_c,
        "grid_monotone": grid_mono.verdict,
        "grid_convex": grid_conv.verdict,
        "determinants_consistent": det_ok,
        "grid_consistent": (grid_mono.passed == v.is_2monotone
                            and grid_conv.passed == v.is_2convex),
    }


# --------------------------------------------------------------------------
# Representation functions c = (f')^(-1/2), d = (f'')^(-1/3)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConcavityReport:
    label: str
    kind: Kind
    points: int
    concave: bool
    first_violation: float | None
    max_second_derivative: float

    def to_dict(self) -> dict:
        return {"function": self.label, "kind": self.kind.value, "points": self.points,
                "concave": self.concave, "first_violation": self.first_violation,
                "max_second_derivative": self.max_second_derivative}


def representation_value_jet(f: FunctionSpec, t: float, kind) -> np.ndarray:
    """Order-2 jet of c = f'^(-1/2) (monotone) or d = f''^(-1/3) (convex) at t."""
    kind = Kind.parse(kind)
    order = 1 if kind is Kind.MONOTONE else 2
    j = jet_lift(f, t, order + 2)
    for _ in range(order):
        j = derivative_jet(j)
    base = j.coeffs
    if base[0] <= 0:
        what = "f'" if kind is Kind.MONOTONE else "f''"
        raise PositivityError(f"{what}({t!r}) = {base[0]!r} <= 0 in {f.label}", float(t))
    return series_pow(np.array(base, dtype=float), -1.0 / (order + 1))


def representation_concavity(f: FunctionSpec, kind, grid_size: int = DEFAULT_GRID,
                             tol: float = DEFAULT_TOL) -> ConcavityReport:
    """Concavity of the representation function on the interior grid."""
    kind = Kind.parse(kind)
    first = None
    worst = -math.inf
    grid = interior_grid(f.domain, grid_size)
    for t in grid:
        c = representation_value_jet(f, float(t), kind)
        second = 2.0 * c[2]
        worst = max(worst, second)
        if first is None and second > tol * max(1.0, abs(c[0])):
            first = float(t)
    return ConcavityReport(f.label, kind, len(grid), first is None, first, float(worst))


# --------------------------------------------------------------------------
# Sign patterns on half-lines
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SignCheck:
    t: float
    order: int          # derivative order checked
    sign: int           # required sign: +1 means >= 0, -1 means <= 0
    value: float
    ok: bool
    derived: bool = False


@dataclass(frozen=True)
class SignPatternReport:
    label: str
    n: int
    kind: Kind
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> tuple:
        return tuple(c for c in self.checks if not c.ok)

    def to_dict(self) -> dict:
        return {"function": self.label, "n": self.n, "kind": self.kind.value,
                "passed": self.passed, "checks": len(self.checks),
                "failures": [(c.order, c.t, c.value) for c in self.failures]}


def sign_requirements(n: int, kind) -> list[tuple[int, int, bool]]:
    """(derivative order, required sign, derived?) triples for the half-line sign conditions."""
    kind = Kind.parse(kind)
    shift = 1 if kind is Kind.MONOTONE else 2
    req = [(k + shift, (-1) ** k, False) for k in range(2 * n - 1)]
    if kind is Kind.MONOTONE:
        # f and even derivatives up to 2n-4 concave; odd ones up to 2n-3 convex
        req += [(e + 2, -1, True) for e in range(0, 2 * n - 3, 2)]
        req += [(o + 2, 1, True) for o in range(1, 2 * n - 2, 2)]
    else:
        # f and even derivatives up to 2n-2 convex; odd ones up to 2n-3 concave
        req += [(e + 2, 1, True) for e in range(0, 2 * n - 1, 2)]
        req += [(o + 2, -1, True) for o in range(1, 2 * n - 2, 2)]
    return req


def sign_pattern_check(f: FunctionSpec, n: int, kind,
                       sample_points: Sequence[float] | None = None,
                       tol: float = SIGN_TOL) -> SignPatternReport:
    """Alternating-sign conditions for n-monotone / n-convex f on (a, inf)."""
    kind = Kind.parse(kind)
    if not (math.isfinite(f.domain.lo) and math.isinf(f.domain.hi)):
        raise HypothesisError(f"sign patterns need a domain (a, inf), got {f.domain}")
    if sample_points is None:
        sample_points = interior_grid(f.domain, 100)
    req = sign_requirements(n, kind)
    top = max(order for order, _, _ in req)
    checks = []
    for t in sample_points:
        t = float(t)
        if not f.domain.contains_interior(t):
            raise DomainError(f"sample point {t!r} is not interior", t)
        jet = jet_lift(f, t, top)
        for order, sign, derived in req:
            value = jet.derivative(order)
            checks.append(SignCheck(t, order, sign, value, sign * value >= -tol, derived))
    return SignPatternReport(f.label, n, kind, tuple(checks))


# --------------------------------------------------------------------------
# Whole-line rigidity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RigidityReport:
    label: str
    kind: Kind
    witness_t: float | None
    witness_radius: float | None
    witness: PsdVerdict | None
    history: tuple = ()   # (radius, worst determinant, worst min eigenvalue)

    @property
    def found(self) -> bool:
        return self.witness_t is not None

    def to_dict(self) -> dict:
        return {
            "function": self.label, "kind": self.kind.value, "found": self.found,
            "witness_t": self.witness_t, "witness_radius": self.witness_radius,
            "witness": self.witness.to_dict() if self.witness else None,
            "history": [list(h) for h in self.history],
        }


def whole_line_rigidity_scan(f: FunctionSpec, kind, radius_steps: int = 20,
                             points_per_radius: int = 17,
                             tol: float = DEFAULT_TOL) -> RigidityReport:
    """Search expanding windows [-R, R], R = 1, 2, ..., 2^steps, for an
    Indefinite order-2 matrix."""
    kind = Kind.parse(kind)
    if not f.domain.is_whole_line:
        raise HypothesisError(f"rigidity scan needs the whole real line, got {f.domain}")
    history = []
    for step in range(radius_steps + 1):
        radius = 2.0 ** step
        worst_det = math.inf
        worst_eig = math.inf
        for t in np.linspace(-radius, radius, points_per_radius):
            m = derivative_matrix(f, float(t), 2, kind)
            v = psd_test(m, tol)
            worst_det = min(worst_det, v.minors[-1])
            worst_eig = min(worst_eig, v.min_eigenvalue)
            if v.classification is Classification.INDEFINITE:
                history.append((radius, worst_det, worst_eig))
                return RigidityReport(f.label, kind, float(t), radius, v, tuple(history))
        history.append((radius, worst_det, worst_eig))
    return RigidityReport(f.label, kind, None, None, None, tuple(history))


# --------------------------------------------------------------------------
# Antiderivatives of 2-monotone functions
# --------------------------------------------------------------------------


def antiderivative_kraus(f: FunctionSpec, t: float, n: int = 2) -> np.ndarray:
    """K_n(g; t) for g an antiderivative of f, read off the shifted jet of f."""
    g = antiderivative_jet(jet_lift(f, t, 2 * n - 1))
    return hankel_from_coeffs(g.coeffs, n, 2)


def antiderivative_convexity(f: FunctionSpec, grid_size: int = DEFAULT_GRID,
                             tol: float = DEFAULT_TOL) -> GridReport:
    pre = grid_classify(f, 2, Kind.MONOTONE, grid_size, tol)
    if not pre.passed:
        raise NotMonotone(f"{f.label} is not 2-monotone (indefinite at t = {pre.worst.t!r})")
    grid = interior_grid(f.domain, grid_size)
    return _scan(f"integral of {f.label}", 2, Kind.CONVEX, grid,
                 lambda t: antiderivative_kraus(f, t, 2), tol)
