import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matconvex.criteria import Kind, grid_classify
from matconvex.errors import PreconditionError, SearchExhausted
from matconvex.expr import Interval
from matconvex.jets import jet_lift
from matconvex.linalg import Classification
from matconvex.polylab import (Polynomial, Target, construct_strict_polynomial,
                               gap_polynomial_search, poly_eval_derivatives, verify_strict)

IV = Interval(-1.0, 1.0)


def test_poly_eval_examples():
    cube = Polynomial((0, 0, 0, 1), IV)
    assert poly_eval_derivatives(cube, 1, 4) == [1, 3, 6, 6, 0]
    assert poly_eval_derivatives(Polynomial((5,), IV), 0.7, 2) == [5, 0, 0]
    with pytest.raises(PreconditionError):
        poly_eval_derivatives(cube, 1, 6)


def test_poly_eval_exact_with_fractions():
    p = Polynomial((Fraction(1, 3), 0, Fraction(2, 7)), IV)
    vals = poly_eval_derivatives(p, Fraction(1, 2), 2)
    assert vals == [Fraction(1, 3) + Fraction(2, 7) / 4, Fraction(2, 7), Fraction(4, 7)]
    assert p.exact


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=7, max_size=7).filter(lambda c: c[-1] != 0),
       st.floats(-0.9, 0.9))
def test_poly_eval_matches_jets(cs, t):
    p = Polynomial(tuple(cs), IV)
    vals = poly_eval_derivatives(p, t, 6)
    jet = jet_lift(p.to_spec(), t, 6)
    for k in range(7):
        scale = sum(abs(c) * math.perm(j, k) for j, c in enumerate(cs) if j >= k)
        assert abs(vals[k] - jet.derivative(k)) <= 1e-12 * max(1.0, scale)


def test_polynomial_validation():
    with pytest.raises(ValueError):
        Polynomial((1.0, 0.0), IV)
    assert Polynomial((1.0, 2.0, 3.0), IV).derivative_coefficients(1) == (2.0, 6.0)


@pytest.mark.parametrize("target", list(Target))
@pytest.mark.parametrize("n,m", [(1, 2), (1, 5), (2, 4), (2, 6), (3, 8)])
def test_construct_strict(n, m, target):
    p = construct_strict_polynomial(n, m, IV, target, seed=0)
    assert p.degree == m
    assert verify_strict(p, n, target, 129).passed


def test_construct_concave_small_example():
    p = construct_strict_polynomial(1, 2, Interval(0, 1), Target.CONCAVE_MONOTONE, seed=3)
    f = p.to_spec()
    for t in np.linspace(0.01, 0.99, 25):
        j = jet_lift(f, float(t), 2)
        assert j.derivative(1) > 0 and j.derivative(2) < 0


def test_construct_preconditions():
    with pytest.raises(PreconditionError):
        construct_strict_polynomial(2, 3, IV, Target.CONVEX_MONOTONE)
    with pytest.raises(PreconditionError):
        construct_strict_polynomial(2, 4, Interval(0, math.inf), Target.CONVEX_MONOTONE)


def test_construct_exhausts_with_tiny_budget():
    with pytest.raises(SearchExhausted) as info:
        construct_strict_polynomial(3, 6, IV, Target.CONVEX_MONOTONE, seed=0, budget=1)
    assert info.value.best is None or info.value.best.degree == 6


def test_construct_is_deterministic():
    a = construct_strict_polynomial(2, 5, IV, "convex-monotone", seed=4)
    b = construct_strict_polynomial(2, 5, IV, "convex-monotone", seed=4)
    assert a == b


@pytest.mark.parametrize("n,m", [(2, 4), (3, 6)])
def test_nesting_of_constructed_polynomials(n, m):
    p = construct_strict_polynomial(n, m, IV, Target.CONVEX_MONOTONE, seed=1).to_spec()
    for order in range(1, n + 1):
        for kind in Kind:
            assert grid_classify(p, order, kind).passed


def test_gap_search_cubic():
    cert = gap_polynomial_search(1, Interval(0.1, 2.0), 3, seed=0)
    assert cert.replay()
    assert cert.fail_verdict.classification is Classification.INDEFINITE
    assert cert.fail_witness.A.shape == (2, 2) and cert.fail_witness.gap_min_eigenvalue < -1e-6
    f = cert.polynomial.to_spec()
    assert grid_classify(f, 1, Kind.CONVEX).passed
    assert not grid_classify(f, 2, Kind.CONVEX).passed
    d = cert.to_dict()
    assert d["fail_evidence"]["indefinite_verdict"]["classification"] == "Indefinite"


def test_gap_search_symmetric_interval():
    cert = gap_polynomial_search(1, IV, 3, seed=0)
    assert cert.replay() and cert.polynomial.degree == 3


def test_gap_search_quintic_certifies_or_exhausts():
    try:
        cert = gap_polynomial_search(2, IV, 5, seed=0, max_seconds=60)
    except SearchExhausted:
        return
    assert cert.replay()
    assert grid_classify(cert.polynomial.to_spec(), 1, Kind.CONVEX).passed


def test_gap_search_preconditions():
    with pytest.raises(PreconditionError):
        gap_polynomial_search(1, IV, 1)
    with pytest.raises(PreconditionError):
        gap_polynomial_search(1, Interval(0, math.inf), 3)
