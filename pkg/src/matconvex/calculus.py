"""Definitional checks: Hermitian functional calculus and divided differences.

Everything here is driven by explicit seeds.  Trial ``i`` of a search with
seed ``s`` draws from ``numpy.random.default_rng([s, i])``, so any trial can
be regenerated on its own and searches can be split across workers without
changing results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .criteria import Kind
from .errors import (DomainError, NotComparable, SpectrumOutOfDomain,
                     UnboundedInterval)
from .expr import FunctionSpec, Interval, evaluate, interior_grid
from .jets import jet_lift
from .linalg import DEFAULT_TOL, PsdVerdict, psd_test

MARGIN = 1e-6
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def bounded_window(interval: Interval, window: Interval | None = None) -> Interval:
    """The bounded part of ``interval`` that random matrices are drawn from."""
    if interval.is_bounded:
        return interval
    if window is None:
        raise UnboundedInterval(f"{interval} is unbounded and no truncation window is configured")
    lo, hi = max(interval.lo, window.lo), min(interval.hi, window.hi)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise UnboundedInterval(f"window {window} does not bound {interval}")
    return Interval(lo, hi)


# --------------------------------------------------------------------------
# Matrices
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("Hermitian matrix must be square")
        if np.abs(a - a.conj().T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(a).max(initial=0.0)):
            raise ValueError("matrix is not conjugate-symmetric")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


def _arr(m) -> np.ndarray:
    return np.asarray(getattr(m, "entries", m), dtype=complex)


def _herm(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, interval: Interval, seed=None,
                     window: Interval | None = None) -> HermitianMatrix:
    """U diag(eigs) U* with eigs uniform inside ``interval`` and U Haar."""
    if not 1 <= dim <= 8:
        raise ValueError("dimension must be between 1 and 8")
    iv = bounded_window(interval, window)
    rng = _rng(seed)
    delta = MARGIN * (iv.hi - iv.lo)
    eigs = rng.uniform(iv.lo + delta, iv.hi - delta, size=dim)
    u = haar_unitary(dim, rng)
    return HermitianMatrix(_herm((u * eigs) @ u.conj().T))


def apply_function(f: FunctionSpec, a) -> HermitianMatrix:
    """f(A) = U f(Lambda) U* from the spectral decomposition of A."""
    a = _herm(_arr(a))
    w, u = np.linalg.eigh(a)
    for lam in w:
        if not f.domain.contains_interior(lam):
            raise SpectrumOutOfDomain(f"eigenvalue {lam!r} outside {f.domain}", float(lam))
    try:
        fw = evaluate(f, w)
    except DomainError as exc:
        raise SpectrumOutOfDomain(str(exc), exc.t) from None
    return HermitianMatrix(_herm((u * fw) @ u.conj().T))


def gap_tolerance(gap: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    return tol * (1.0 + float(np.linalg.norm(gap, 2)))


def _min_eig(a: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(_herm(a))[0])


def convexity_gap(f: FunctionSpec, a, b, lam: float) -> tuple[np.ndarray, float]:
    """lam f(A) + (1-lam) f(B) - f(lam A + (1-lam) B) and its least eigenvalue."""
    a, b = _arr(a), _arr(b)
    mix = lam * a + (1.0 - lam) * b
    gap = (lam * apply_function(f, a).entries + (1.0 - lam) * apply_function(f, b).entries
           - apply_function(f, mix).entries)
    gap = _herm(gap)
    return gap, _min_eig(gap)


def monotonicity_gap(f: FunctionSpec, a, b, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, float]:
    """f(B) - f(A) for A <= B, and its least eigenvalue."""
    a, b = _arr(a), _arr(b)
    diff = _herm(b - a)
    low = _min_eig(diff)
    if low < -tol * (1.0 + float(np.linalg.norm(diff, 2))):
        raise NotComparable(f"B - A has eigenvalue {low!r} < 0")
    gap = _herm(apply_function(f, b).entries - apply_function(f, a).entries)
    return gap, _min_eig(gap)


# --------------------------------------------------------------------------
# Randomized counterexample search
# --------------------------------------------------------------------------


def _matrix_to_json(a: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a)]


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


@dataclass(frozen=True, eq=False)
class Witness:
    A: np.ndarray
    B: np.ndarray
    lam: float | None
    gap_min_eigenvalue: float
    kind: Kind
    tolerance: float
    seed: int | None = None
    trial: int | None = None

    @property
    def valid(self) -> bool:
        return self.gap_min_eigenvalue < -self.tolerance

    def replay(self, f: FunctionSpec) -> float:
        """Least gap eigenvalue recomputed from the stored matrices."""
        if self.kind is Kind.CONVEX:
            return convexity_gap(f, self.A, self.B, self.lam)[1]
        return monotonicity_gap(f, self.A, self.B)[1]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "A": _matrix_to_json(self.A),
            "B": _matrix_to_json(self.B),
            "lambda": self.lam,
            "gap_min_eigenvalue": self.gap_min_eigenvalue,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "trial": self.trial,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Witness":
        return cls(_matrix_from_json(d["A"]), _matrix_from_json(d["B"]), d["lambda"],
                   d["gap_min_eigenvalue"], Kind.parse(d["kind"]), d["tolerance"],
                   d.get("seed"), d.get("trial"))


@dataclass(frozen=True)
class DefinitionalResult:
    label: str
    n: int
    kind: Kind
    trials: int
    skipped: int
    worst_min_eigenvalue: float
    witness: Witness | None

    @property
    def refuted(self) -> bool:
        return self.witness is not None

    @property
    def verdict(self) -> str:
        return "REFUTED" if self.refuted else "UNREFUTED"

    def to_dict(self) -> dict:
        return {
            "function": self.label, "n": self.n, "kind": self.kind.value,
            "verdict": self.verdict, "trials": self.trials, "skipped": self.skipped,
            "worst_min_eigenvalue": self.worst_min_eigenvalue,
            "witness": self.witness.to_dict() if self.witness else None,
        }


def _sample_window(iv: Interval, rng: np.random.Generator, focus: float | None) -> Interval:
    """Either the whole window or a random sub-window (1% to 100% of its width)."""
    width = iv.hi - iv.lo
    if focus is None and rng.random() < 0.5:
        return iv
    w = width * 10.0 ** (-rng.uniform(0.0, 2.0))
    center = focus if focus is not None else rng.uniform(iv.lo + w / 2, iv.hi - w / 2)
    lo = min(max(center - w / 2, iv.lo), iv.hi - w)
    return Interval(lo, lo + w)


def _refine_lambda(f: FunctionSpec, a, b, lam0: float, val0: float,
                   steps: int = 20) -> tuple[float, float]:
    best_lam, best_val = lam0, val0

    def g(x):
        return convexity_gap(f, a, b, x)[1]

    lo, hi = 0.0, 1.0
    x1, x2 = hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo)
    g1, g2 = g(x1), g(x2)
    for _ in range(steps):
        if g1 < g2:
            hi, x2, g2 = x2, x1, g1
            x1 = hi - GOLDEN * (hi - lo)
            g1 = g(x1)
        else:
            lo, x1, g1 = x1, x2, g2
            x2 = lo + GOLDEN * (hi - lo)
            g2 = g(x2)
        for x, v in ((x1, g1), (x2, g2)):
            if v < best_val:
                best_lam, best_val = x, v
    return best_lam, best_val


def draw_trial(f: FunctionSpec, n: int, kind, seed: int, trial: int,
               window: Interval | None = None, focus: float | None = None):
    """Regenerate trial ``trial``: returns (A, B, lam, gap_min_eig) or None if skipped."""
    kind = Kind.parse(kind)
    rng = np.random.default_rng([int(seed), int(trial)])
    iv = bounded_window(f.domain, window)
    sub = _sample_window(iv, rng, focus)
    a = random_hermitian(n, sub, rng).entries
    if kind is Kind.CONVEX:
        b = random_hermitian(n, sub, rng).entries
        lam = float(rng.random())
        return a, b, lam, convexity_gap(f, a, b, lam)[1]
    rank = int(rng.integers(1, n + 1))
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    p = _herm(g @ g.conj().T)
    target = rng.uniform(0.05, 1.0) * (sub.hi - sub.lo)
    scale = float(np.linalg.norm(p, 2)) / target
    delta = MARGIN * (iv.hi - iv.lo)
    for _ in range(100):
        b = _herm(a + p / scale)
        top = float(np.linalg.eigvalsh(b)[-1])
        if top < iv.hi - delta and f.domain.contains_interior(top):
            return a, b, None, monotonicity_gap(f, a, b)[1]
        scale *= 2.0
    return None


def definitional_test(f: FunctionSpec, n: int, kind, trials: int = 1000, seed: int = 0,
                      tol: float = DEFAULT_TOL, window: Interval | None = None,
                      focus: float | None = None, refine: bool = True) -> DefinitionalResult:
    """Random search for a violation of the matrix inequality on n x n matrices.

    Half of the trials draw spectra from the whole (bounded) window and half
    from random sub-windows, which is where local failures of the
    differential criteria show up.  With ``focus`` every trial is centred
    there instead.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    kind = Kind.parse(kind)
    worst = None
    skipped = 0
    for i in range(trials):
        drawn = draw_trial(f, n, kind, seed, i, window, focus)
        if drawn is None:
            skipped += 1
            continue
        if worst is None or drawn[3] < worst[1][3]:
            worst = (i, drawn)
    if worst is None:
        return DefinitionalResult(f.label, n, kind, trials, skipped, math.inf, None)
    i, (a, b, lam, val) = worst
    if kind is Kind.CONVEX and refine and n > 1:
        lam, val = _refine_lambda(f, a, b, lam, val)
    gap = (convexity_gap(f, a, b, lam) if kind is Kind.CONVEX else monotonicity_gap(f, a, b))[0]
    threshold = gap_tolerance(gap, tol)
    witness = None
    if val < -threshold:
        witness = Witness(np.array(a), np.array(b), lam, val, kind, threshold, int(seed), i)
    return DefinitionalResult(f.label, n, kind, trials, skipped, float(val), witness)


def replay_trial(f: FunctionSpec, witness: Witness, window: Interval | None = None,
                 focus: float | None = None, refine: bool = True) -> float:
    """Regenerate a witness from its seed and trial index; returns the gap eigenvalue."""
    n = witness.A.shape[0]
    a, b, lam, val = draw_trial(f, n, witness.kind, witness.seed, witness.trial, window, focus)
    if witness.kind is Kind.CONVEX and refine and n > 1:
        lam, val = _refine_lambda(f, a, b, lam, val)
    return val


# --------------------------------------------------------------------------
# Divided differences
# --------------------------------------------------------------------------


def divided_difference(f: FunctionSpec, points: Sequence[float]) -> float:
    """[t_0, ..., t_k] f, with coinciding points handled through derivatives."""
    pts = sorted(float(p) for p in points)
    if not 1 <= len(pts) <= 3:
        raise ValueError("divided differences of 1 to 3 points are supported")
    for p in pts:
        if not f.domain.contains_interior(p):
            raise DomainError(f"{p!r} is not interior to {f.domain}", p)

    def dd(lo: int, hi: int) -> float:
        if pts[lo] == pts[hi]:
            return float(jet_lift(f, pts[lo], hi - lo).coeffs[hi - lo])
        return (dd(lo + 1, hi) - dd(lo, hi - 1)) / (pts[hi] - pts[lo])

    return dd(0, len(pts) - 1)


@dataclass(frozen=True, eq=False)
class DividedDifferenceMatrix:
    anchor: float | None
    points: tuple
    entries: np.ndarray


def kraus_divided_matrix(f: FunctionSpec, t0: float, points: Sequence[float],
                         tol: float = DEFAULT_TOL) -> tuple[DividedDifferenceMatrix, PsdVerdict]:
    """Matrix of second divided differences [t_i, t_j, t0] f and its PSD verdict."""
    pts = tuple(float(p) for p in points)
    if len(pts) > 12:
        raise ValueError("at most 12 nodes")
    m = np.array([[divided_difference(f, (ti, tj, t0)) for tj in pts] for ti in pts])
    m = 0.5 * (m + m.T)
    return DividedDifferenceMatrix(float(t0), pts, m), psd_test(m, tol)


def loewner_matrix(f: FunctionSpec, points: Sequence[float],
                   tol: float = DEFAULT_TOL) -> tuple[DividedDifferenceMatrix, PsdVerdict]:
    """Matrix of first divided differences [t_i, t_j] f (monotonicity analogue)."""
    pts = tuple(float(p) for p in points)
    if len(pts) > 12:
        raise ValueError("at most 12 nodes")
    m = np.array([[divided_difference(f, (ti, tj)) for tj in pts] for ti in pts])
    m = 0.5 * (m + m.T)
    return DividedDifferenceMatrix(None, pts, m), psd_test(m, tol)


@dataclass(frozen=True)
class DividedDifferenceResult:
    label: str
    n: int
    kind: Kind
    node_sets: int
    indefinite_sets: int
    worst_anchor: float | None
    worst_points: tuple
    worst: PsdVerdict

    @property
    def refuted(self) -> bool:
        return self.indefinite_sets > 0

    @property
    def verdict(self) -> str:
        return "REFUTED" if self.refuted else "UNREFUTED"

    def to_dict(self) -> dict:
        return {
            "function": self.label, "n": self.n, "kind": self.kind.value,
            "verdict": self.verdict, "node_sets": self.node_sets,
            "indefinite_sets": self.indefinite_sets, "worst_anchor": self.worst_anchor,
            "worst_points": list(self.worst_points), "worst": self.worst.to_dict(),
        }


def node_set(interval: Interval, n: int, seed: int, index: int) -> tuple[float, tuple]:
    """Set 0 anchors at the midpoint with Chebyshev nodes; later sets are random."""
    if index == 0:
        return interval.midpoint, tuple(float(t) for t in interior_grid(interval, n))
    rng = np.random.default_rng([int(seed), 0x5EED, int(index)])
    delta = MARGIN * (interval.hi - interval.lo)
    anchor = float(rng.uniform(interval.lo + delta, interval.hi - delta))
    pts = np.sort(rng.uniform(interval.lo + delta, interval.hi - delta, size=n))
    return anchor, tuple(float(t) for t in pts)


def divided_difference_test(f: FunctionSpec, n: int, kind, node_sets: int = 20,
                            seed: int = 0, tol: float = DEFAULT_TOL,
                            window: Interval | None = None) -> DividedDifferenceResult:
    """Sampled divided-difference criterion: Kraus matrices (convex) or
    Loewner matrices (monotone) over ``node_sets`` node sets."""
    kind = Kind.parse(kind)
    iv = bounded_window(f.domain, window)
    worst = None
    bad = 0
    for s in range(node_sets):
        anchor, pts = node_set(iv, n, seed, s)
        if kind is Kind.CONVEX:
            _, v = kraus_divided_matrix(f, anchor, pts, tol)
        else:
            anchor = None
            _, v = loewner_matrix(f, pts, tol)
        if not v.passes:
            bad += 1
        score = v.score
        if worst is None or score < worst[0]:
            worst = (score, anchor, pts, v)
    _, anchor, pts, v = worst
    return DividedDifferenceResult(f.label, n, kind, node_sets, bad, anchor, pts, v)
