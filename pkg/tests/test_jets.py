import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matconvex.errors import DomainError, OrderCap
from matconvex.expr import Interval, parse
from matconvex.jets import (Jet, antiderivative_jet, derivative, derivative_jet,
                            finite_difference_oracle, jet_lift, series_mul, taylor_shift)

SUITE = ["x^2", "x^3", "x^0.5", "-1/x", "log(1 + x)", "exp(x)", "x/(1 + x)", "x - log(1 + x)"]


def spec(text, domain="(0.1, 4)"):
    return parse(f"{text} on {domain}")


def test_jet_examples():
    assert np.allclose(jet_lift(parse("exp(x)"), 0.0, 4).coeffs,
                       [1, 1, 1 / 2, 1 / 6, 1 / 24], rtol=0, atol=1e-15)
    assert np.array_equal(jet_lift(parse("x^3"), 1.0, 4).coeffs, [1, 3, 3, 1, 0])
    half = jet_lift(spec("x^0.5"), 1.0, 3).coeffs
    assert np.allclose(half, [1, 0.5, -0.125, 0.0625], rtol=1e-15)
    for k in range(4):
        fd = finite_difference_oracle(spec("x^0.5"), 1.0, k, 1e-3) / math.factorial(k)
        assert abs(fd - half[k]) < 1e-6


def test_derivative_examples():
    assert derivative(spec("x^0.5"), 1.0, 1) == 0.5
    f = spec("x/(1 + x)")
    assert derivative(f, 1.3, 0) == f(1.3)
    assert math.isclose(derivative(spec("1/x"), 2.0, 3), -0.375, rel_tol=1e-15)


def test_finite_difference_examples():
    assert abs(finite_difference_oracle(parse("x^2"), 1.0, 2, 1e-3) - 2.0) <= 1e-8
    assert abs(finite_difference_oracle(parse("exp(x)"), 0.0, 3, 1e-2) - 1.0) <= 1e-4
    assert abs(finite_difference_oracle(spec("x^0.5"), 1.0, 2, 1e-3) + 0.25) <= 1e-6


def test_finite_difference_rejects_bad_input():
    with pytest.raises(ValueError):
        finite_difference_oracle(parse("x^2"), 1.0, 7, 1e-3)
    with pytest.raises(ValueError):
        finite_difference_oracle(parse("x^2"), 1.0, 2, 0.0)
    with pytest.raises(DomainError):
        finite_difference_oracle(spec("x^0.5"), 0.1001, 2, 1e-2)


def test_antiderivative_examples():
    one = jet_lift(parse("1"), 0.5, 3)
    assert np.array_equal(antiderivative_jet(one).coeffs[:2], [0.0, 1.0])
    t = jet_lift(parse("x"), 0.0, 3)
    assert np.array_equal(antiderivative_jet(t).coeffs, [0, 0, 0.5, 0, 0])
    f = jet_lift(spec("x/(1 + x)"), 1.0, 3)
    g = jet_lift(spec("x - log(1 + x)"), 1.0, 4)
    assert np.allclose(antiderivative_jet(f).coeffs[1:], g.coeffs[1:], rtol=1e-14, atol=1e-16)


def test_order_cap():
    with pytest.raises(OrderCap):
        jet_lift(parse("exp(x)"), 0.0, 65)
    jet_lift(parse("exp(x)"), 0.0, 64)


def test_domain_error_in_jet():
    with pytest.raises(DomainError):
        jet_lift(parse("log(x)"), -1.0, 3)


def test_jet_is_immutable():
    j = jet_lift(parse("exp(x)"), 0.0, 3)
    with pytest.raises(ValueError):
        j.coeffs[0] = 2.0


@pytest.mark.parametrize("text", SUITE)
def test_derivative_matches_oracle(text):
    f = spec(text)
    for t in np.linspace(0.2, 3.9, 7):
        for k in range(7):
            d = derivative(f, float(t), k)
            fd = finite_difference_oracle(f, float(t), k, 1e-4, dps=50)
            assert abs(d - fd) <= 1e-6 * max(1.0, abs(d))


points = st.floats(0.2, 3.8)
weights = st.floats(-3.0, 3.0)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(SUITE), st.sampled_from(SUITE), weights, weights, points)
def test_linearity(a, b, alpha, beta, t):
    fa, fb = spec(a), spec(b)
    combo = parse(f"({alpha!r})*({a}) + ({beta!r})*({b}) on (0.1, 4)")
    got = jet_lift(combo, t, 6).coeffs
    want = alpha * jet_lift(fa, t, 6).coeffs + beta * jet_lift(fb, t, 6).coeffs
    scale = np.abs(alpha * jet_lift(fa, t, 6).coeffs) + np.abs(beta * jet_lift(fb, t, 6).coeffs)
    assert np.all(np.abs(got - want) <= 1e-13 * np.maximum(1.0, scale))


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(SUITE), st.sampled_from(SUITE), points)
def test_leibniz(a, b, t):
    prod = jet_lift(spec(f"({a})*({b})"), t, 6).coeffs
    ja, jb = jet_lift(spec(a), t, 6).coeffs, jet_lift(spec(b), t, 6).coeffs
    want = series_mul(ja, jb)
    scale = series_mul(np.abs(ja), np.abs(jb))
    assert np.all(np.abs(prod - want) <= 1e-13 * np.maximum(1.0, scale))


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(SUITE), points, st.integers(1, 10))
def test_antiderivative_round_trip(text, t, order):
    j = jet_lift(spec(text), t, order)
    back = derivative_jet(antiderivative_jet(j))
    # a_k / (k+1) * (k+1) can differ from a_k by one rounding
    assert back.base == j.base
    assert np.all(np.abs(back.coeffs - j.coeffs) <= 2 * np.spacing(np.abs(j.coeffs)))


def test_antiderivative_round_trip_exact_on_dyadic_jet():
    j = jet_lift(parse("poly[1,2,4,8]"), 0.5, 3)
    assert derivative_jet(antiderivative_jet(j)) == j


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6), st.floats(-2, 2))
def test_taylor_shift_matches_evaluation(cs, t0):
    shifted = taylor_shift(np.array(cs), t0)
    u = 0.37
    direct = sum(c * (t0 + u) ** k for k, c in enumerate(cs))
    via = sum(c * u ** k for k, c in enumerate(shifted))
    assert abs(direct - via) <= 1e-12 * (1 + sum(abs(c) * (abs(t0) + 1) ** k for k, c in enumerate(cs)))


def test_poly_child_jet_is_exact():
    j = jet_lift(parse("poly[1,2,3](x^2)"), 1.0, 4)
    # 1 + 2 x^2 + 3 x^4 expanded at x = 1
    assert np.allclose(j.coeffs, [6, 16, 20, 12, 3], rtol=1e-15)
    assert isinstance(j, Jet) and j.order == 4
