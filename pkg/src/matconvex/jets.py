"""Truncated Taylor series ("jets") of expression trees.

A jet of order K at t0 stores a_k = f^(k)(t0)/k! for k = 0..K.  All
recurrences work on these normalized coefficients, so Hankel matrices are
read off directly and no factorial is ever formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OrderCap
from .expr import (Const, Exp, FunctionSpec, Log, Neg, Node, Poly, Pow,
                   Product, Recip, Sum, Var, evaluate, evaluate_mp,
                   is_integer_exponent)

MAX_ORDER = 64


@dataclass(frozen=True, eq=False)
class Jet:
    base: float
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("jet needs a non-empty coefficient vector")
        if not np.all(np.isfinite(c)):
            raise DomainError("non-finite jet coefficient", self.base)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "base", float(self.base))

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def derivative(self, k: int) -> float:
        return math.factorial(k) * float(self.coeffs[k])

    def __getitem__(self, k):
        return self.coeffs[k]

    def __eq__(self, other):
        return (isinstance(other, Jet) and self.base == other.base
                and np.array_equal(self.coeffs, other.coeffs))

    def __repr__(self):
        return f"Jet(base={self.base!r}, coeffs={self.coeffs.tolist()!r})"


# -- series arithmetic on plain arrays ---------------------------------------


def series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: a.size]


def series_recip(a: np.ndarray) -> np.ndarray:
    if a[0] == 0:
        raise DomainError("reciprocal of zero")
    b = np.zeros_like(a)
    b[0] = 1.0 / a[0]
    for k in range(1, a.size):
        b[k] = -np.dot(a[1:k + 1], b[k - 1::-1]) / a[0]
    return b


def series_exp(a: np.ndarray) -> np.ndarray:
    b = np.zeros_like(a)
    b[0] = math.exp(a[0])
    j = np.arange(a.size, dtype=float)
    for k in range(1, a.size):
        b[k] = np.dot(j[1:k + 1] * a[1:k + 1], b[k - 1::-1]) / k
    return b


def series_log(a: np.ndarray) -> np.ndarray:
    if a[0] <= 0:
        raise DomainError("log of nonpositive argument")
    b = np.zeros_like(a)
    b[0] = math.log(a[0])
    j = np.arange(a.size, dtype=float)
    for k in range(1, a.size):
        # k a0 b_k = k a_k - sum_{j=1}^{k-1} j b_j a_{k-j}
        s = np.dot(j[1:k] * b[1:k], a[k - 1:0:-1])
        b[k] = (a[k] - s / k) / a[0]
    return b


def series_int_pow(a: np.ndarray, p: int) -> np.ndarray:
    if p < 0:
        return series_recip(series_int_pow(a, -p))
    out = np.zeros_like(a)
    out[0] = 1.0
    base = a.copy()
    while p:
        if p & 1:
            out = series_mul(out, base)
        p >>= 1
        if p:
            base = series_mul(base, base)
    return out


def series_pow(a: np.ndarray, p: float) -> np.ndarray:
    if is_integer_exponent(p):
        if p < 0 and a[0] == 0:
            raise DomainError("negative power of zero")
        return series_int_pow(a, int(p))
    if a[0] <= 0:
        raise DomainError("fractional power of nonpositive argument")
    # from a * (a^p)' = p a' a^p:  b_k = sum_j ((p+1) j - k) a_j b_{k-j} / (k a0)
    b = np.zeros_like(a)
    b[0] = a[0] ** p
    j = np.arange(a.size, dtype=float)
    for k in range(1, a.size):
        w = (p + 1.0) * j[1:k + 1] - k
        b[k] = np.dot(w * a[1:k + 1], b[k - 1::-1]) / (k * a[0])
    return b


def taylor_shift(coeffs, t0: float) -> np.ndarray:
    """Coefficients of p(t0 + h) in powers of h, by repeated synthetic division."""
    c = [float(v) for v in coeffs]
    d = len(c) - 1
    out = []
    for _ in range(d + 1):
        acc = c[d]
        rest = [acc]
        for i in range(d - 1, -1, -1):
            acc = acc * t0 + c[i]
            rest.append(acc)
        # rest[-1] is the value; rest[:-1] (reversed) is the quotient
        out.append(rest[-1])
        c = list(reversed(rest[:-1]))
        d -= 1
    return np.array(out, dtype=float)


def _lift(node: Node, t0: float, K: int) -> np.ndarray:
    size = K + 1
    if isinstance(node, Const):
        out = np.zeros(size)
        out[0] = node.value
        return out
    if isinstance(node, Var):
        out = np.zeros(size)
        out[0] = t0
        if K >= 1:
            out[1] = 1.0
        return out
    if isinstance(node, Sum):
        out = _lift(node.children[0], t0, K)
        for c in node.children[1:]:
            out = out + _lift(c, t0, K)
        return out
    if isinstance(node, Product):
        out = _lift(node.children[0], t0, K)
        for c in node.children[1:]:
            out = series_mul(out, _lift(c, t0, K))
        return out
    if isinstance(node, Neg):
        return -_lift(node.child, t0, K)
    if isinstance(node, Recip):
        return series_recip(_lift(node.child, t0, K))
    if isinstance(node, Pow):
        return series_pow(_lift(node.child, t0, K), node.exponent)
    if isinstance(node, Exp):
        return series_exp(_lift(node.child, t0, K))
    if isinstance(node, Log):
        return series_log(_lift(node.child, t0, K))
    if isinstance(node, Poly):
        if isinstance(node.child, Var):
            shifted = taylor_shift(node.coeffs, t0)
            out = np.zeros(size)
            m = min(size, shifted.size)
            out[:m] = shifted[:m]
            return out
        u = _lift(node.child, t0, K)
        out = np.zeros(size)
        out[0] = node.coeffs[-1]
        for c in reversed(node.coeffs[:-1]):
            out = series_mul(out, u)
            out[0] += c
        return out
    raise TypeError(f"not an expression node: {node!r}")


def jet_lift(f: FunctionSpec, t0: float, K: int) -> Jet:
    """Normalized Taylor coefficients a_0..a_K of ``f`` at ``t0``."""
    if K > MAX_ORDER:
        raise OrderCap(f"jet order {K} exceeds cap {MAX_ORDER}")
    if K < 0:
        raise ValueError("jet order must be non-negative")
    t0 = float(t0)
    if not f.domain.contains_interior(t0):
        raise DomainError(f"{t0!r} is not interior to {f.domain}", t0)
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            coeffs = _lift(f.expr, t0, K)
    except (DomainError, FloatingPointError, OverflowError) as exc:
        raise DomainError(f"jet of {f.label} at {t0!r}: {exc}", t0) from None
    return Jet(t0, coeffs)


def derivative(f: FunctionSpec, t: float, k: int) -> float:
    """k-th derivative of ``f`` at ``t``."""
    return jet_lift(f, t, k).derivative(k)


def antiderivative_jet(j: Jet) -> Jet:
    """Jet of an antiderivative g with g(t0) = 0 and g' = f."""
    if j.order + 1 > MAX_ORDER:
        raise OrderCap(f"antiderivative order {j.order + 1} exceeds cap {MAX_ORDER}")
    k = np.arange(1, j.order + 2, dtype=float)
    return Jet(j.base, np.concatenate(([0.0], j.coeffs / k)))


def derivative_jet(j: Jet) -> Jet:
    """Jet of f' from a jet of f (order drops by one)."""
    if j.order < 1:
        raise ValueError("need order >= 1 to differentiate")
    k = np.arange(1, j.order + 1, dtype=float)
    return Jet(j.base, j.coeffs[1:] * k)


def _binomial_row(k: int) -> list[int]:
    return [(-1) ** j * math.comb(k, j) for j in range(k + 1)]


def finite_difference_oracle(f: FunctionSpec, t: float, k: int, h: float,
                             dps: int | None = None) -> float:
    """Central-difference estimate of f^(k)(t) with one Richardson step.

    Uses the stencil t + (k/2 - j) h, j = 0..k, whose truncation error is
    O(h^2); combining steps h and h/2 cancels that term.  With ``dps`` the
    function values and the differencing run in mpmath at that many decimal
    digits, which removes the h^-k round-off amplification.
    """
    if not 0 <= k <= 6:
        raise ValueError("finite differences are provided up to order 6")
    if h <= 0:
        raise ValueError("step must be positive")
    reach = 0.5 * k * h + h
    if not (f.domain.contains_interior(t - reach) and f.domain.contains_interior(t + reach)):
        raise DomainError(f"stencil around {t!r} leaves {f.domain}", t)
    weights = _binomial_row(k)

    if dps is None:
        def estimate(step):
            pts = np.array([t + (0.5 * k - j) * step for j in range(k + 1)])
            vals = evaluate(f, pts)
            return float(np.dot(weights, vals)) / step ** k

        return (4.0 * estimate(0.5 * h) - estimate(h)) / 3.0

    import mpmath

    with mpmath.workdps(dps):
        tm, hm = mpmath.mpf(t), mpmath.mpf(h)

        def estimate_mp(step):
            total = mpmath.mpf(0)
            for j, w in enumerate(weights):
                total += w * evaluate_mp(f.expr, tm + (mpmath.mpf(k) / 2 - j) * step)
            return total / step ** k

        return float((4 * estimate_mp(hm / 2) - estimate_mp(hm)) / 3)
