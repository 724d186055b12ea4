import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matconvex.criteria import (Kind, antiderivative_convexity, classify_power,
                                derivative_matrix, dobsch_matrix, grid_classify, kraus_matrix,
                                negated, perturbation_certificate, power_convex_det,
                                power_cross_check, power_monotone_det, power_spec,
                                representation_concavity, sign_pattern_check, strict_check,
                                whole_line_rigidity_scan)
from matconvex.errors import (HypothesisError, InvalidPerturber, NoPositiveWindow, NotMonotone,
                              PositivityError)
from matconvex.expr import Const, FunctionSpec, Interval, Product, Var, parse, substitute
from matconvex.jets import jet_lift
from matconvex.linalg import Classification, psd_test
from matconvex.polylab import Target, construct_strict_polynomial

SUITE = ["x^2", "x^3", "x^0.5", "-1/x", "log(1 + x)", "exp(x)", "x/(1 + x)", "x - log(1 + x)"]


def spec(text, domain="(0.1, 4)"):
    return parse(f"{text} on {domain}")


def test_kraus_examples():
    for t in (0.3, 1.0, 2.5):
        assert np.allclose(kraus_matrix(parse("x^3"), t, 2).entries, [[3 * t, 1], [1, 0]],
                           rtol=1e-15, atol=0)
        assert np.array_equal(kraus_matrix(parse("x^2"), t, 2).entries, [[1, 0], [0, 0]])
    assert np.allclose(kraus_matrix(parse("exp(x)"), 0.0, 2).entries,
                       [[1 / 2, 1 / 6], [1 / 6, 1 / 24]], rtol=1e-15)


def test_dobsch_examples():
    assert np.allclose(dobsch_matrix(spec("x^0.5"), 1.0, 2).entries,
                       [[0.5, -0.125], [-0.125, 0.0625]], rtol=1e-15)
    assert np.array_equal(dobsch_matrix(parse("x"), 0.7, 2).entries, [[1, 0], [0, 0]])
    m = dobsch_matrix(parse("x^3"), 1.0, 2)
    assert np.array_equal(m.entries, [[3, 3], [3, 1]]) and m.det == -6


def test_strict_check_examples():
    assert strict_check(spec("x^0.5"), 1.0, 2, Kind.MONOTONE)
    assert math.isclose(dobsch_matrix(spec("x^0.5"), 1.0, 2).det, 0.015625, rel_tol=1e-14)
    assert not strict_check(parse("x"), 1.0, 2, Kind.MONOTONE)
    assert not strict_check(parse("x^2"), 1.0, 2, Kind.CONVEX)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SUITE), st.floats(0.2, 3.8), st.integers(1, 4))
def test_hankel_consistency(text, t, n):
    f = spec(text)
    a = jet_lift(f, t, 2 * n).coeffs
    k = kraus_matrix(f, t, n).entries
    d = dobsch_matrix(f, t, n).entries
    for i in range(n):
        for j in range(n):
            assert k[i, j] == a[i + j + 2]
            assert d[i, j] == a[i + j + 1]


def test_grid_examples():
    assert grid_classify(spec("x^0.5", "(0.1, 10)"), 2, Kind.MONOTONE).passed
    r = grid_classify(spec("x^3", "(0.1, 10)"), 2, Kind.CONVEX)
    assert not r.passed and len(r.indefinite) == r.points
    for kind in Kind:
        r = grid_classify(spec("2 + 3*x", "(-5, 5)"), 3, kind)
        assert r.passed and r.worst.verdict.classification is Classification.BOUNDARY_PSD


def test_grid_size_floor():
    with pytest.raises(ValueError):
        grid_classify(spec("x^2"), 2, Kind.CONVEX, grid_size=8)


def test_power_examples():
    assert power_monotone_det(0.5, 1.0) == 0.015625
    assert power_monotone_det(1.0, 3.3) == 0.0
    assert power_monotone_det(2.0, 1.0) == -1.0
    assert power_convex_det(3.0, 1.0) == -1.0
    assert math.isclose(kraus_matrix(parse("x^3"), 1.0, 2).det, power_convex_det(3.0, 1.0))
    assert power_convex_det(2.0, 0.7) == 0.0 and power_convex_det(-1.0, 0.7) == 0.0
    assert (classify_power(0.5).is_2monotone, classify_power(0.5).is_2convex) == (True, False)
    assert (classify_power(1.5).is_2monotone, classify_power(1.5).is_2convex) == (False, True)
    assert (classify_power(3).is_2monotone, classify_power(3).is_2convex) == (False, False)


@pytest.mark.parametrize("p", [-1.5, -1, -0.5, 0, 0.25, 0.5, 1, 1.5, 2, 2.5, 3])
def test_power_cross_check(p):
    r = power_cross_check(p)
    assert r["grid_consistent"] and r["determinants_consistent"]


@settings(max_examples=50, deadline=None)
@given(st.floats(-2, 3), st.floats(0.5, 2))
def test_closed_forms_match_jets(p, t):
    f = power_spec(p, Interval(0.25, 4))
    for kind, closed in ((Kind.MONOTONE, power_monotone_det), (Kind.CONVEX, power_convex_det)):
        c = closed(p, t)
        assert abs(derivative_matrix(f, t, 2, kind).det - c) <= 1e-9 * max(1.0, abs(c))


def test_representation_examples():
    assert representation_concavity(spec("x^0.5", "(0.25, 4)"), Kind.MONOTONE).concave
    assert not representation_concavity(spec("x^3", "(0.5, 2)"), Kind.MONOTONE).concave
    assert not representation_concavity(spec("x^2", "(1, 2)"), Kind.MONOTONE).concave
    assert representation_concavity(spec("x^1.5", "(0.25, 4)"), Kind.CONVEX).concave
    with pytest.raises(PositivityError):
        representation_concavity(spec("-x", "(1, 2)"), Kind.MONOTONE)


def test_sign_pattern_examples():
    pts = [0.5, 1.0, 2.0]
    assert sign_pattern_check(spec("-1/x", "(0, inf)"), 2, Kind.MONOTONE, pts).passed
    r = sign_pattern_check(spec("x^2", "(0, inf)"), 2, Kind.MONOTONE, pts)
    assert not r.passed and {c.order for c in r.failures} == {2}
    assert sign_pattern_check(spec("x - log(1 + x)", "(0, inf)"), 2, Kind.CONVEX, pts).passed
    with pytest.raises(HypothesisError):
        sign_pattern_check(spec("x^2"), 2, Kind.MONOTONE)


@pytest.mark.parametrize("text", ["-1/x", "log(1 + x)", "x^0.5", "x/(1 + x)"])
@pytest.mark.parametrize("n", [2, 3])
def test_sign_patterns_operator_monotone_suite(text, n):
    assert sign_pattern_check(spec(text, "(0, inf)"), n, Kind.MONOTONE).passed


def test_rigidity_examples():
    r = whole_line_rigidity_scan(parse("exp(x)"), Kind.CONVEX)
    assert r.found
    assert math.isclose(r.witness.minors[-1], -math.exp(2 * r.witness_t) / 144, rel_tol=1e-10)
    assert not whole_line_rigidity_scan(parse("1 + 2*x"), Kind.MONOTONE).found
    assert not whole_line_rigidity_scan(parse("x^2"), Kind.CONVEX).found
    with pytest.raises(HypothesisError):
        whole_line_rigidity_scan(spec("exp(x)"), Kind.CONVEX)


def test_antiderivative_examples():
    assert antiderivative_convexity(spec("x/(1 + x)", "(0, 10)")).passed
    assert antiderivative_convexity(spec("1")).passed
    assert antiderivative_convexity(spec("x^0.5", "(0.1, 9)")).passed
    with pytest.raises(NotMonotone):
        antiderivative_convexity(spec("x^3"))


def _strict_g():
    return construct_strict_polynomial(2, 4, Interval(-1, 1), Target.CONVEX_MONOTONE).to_spec()


def test_perturbation_examples():
    g = _strict_g()
    cert = perturbation_certificate(parse("x^2 on (-1, 1)"), g, 0.0, 2)
    assert cert.eta > 0
    assert all(d > 0 for _, ms in cert.epsilon_samples for d in ms)
    assert cert.limit_verdict.classification is Classification.BOUNDARY_PSD
    both = perturbation_certificate(g, g, 0.0, 2)
    assert both.eta == 1.0 and len(both.epsilon_samples) == 41
    assert both.limit_verdict.classification is Classification.POSITIVE_DEFINITE
    with pytest.raises(NoPositiveWindow):
        perturbation_certificate(parse("x^3 on (-1, 1)"), g, 0.0, 2)
    with pytest.raises(InvalidPerturber):
        perturbation_certificate(g, parse("x^2"), 0.0, 2)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SUITE), st.floats(0.1, 5.0), st.floats(-5, 5), st.sampled_from(list(Kind)))
def test_affine_invariance(text, a, b, kind):
    # the absolute tolerance floor max(1, |M|) is not scale free, so a stays >= 0.1
    f = spec(text)
    g = spec(f"({a!r})*({text}) + ({b!r})")
    assert grid_classify(g, 2, kind, 33).passed == grid_classify(f, 2, kind, 33).passed


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SUITE), st.floats(0.3, 3.0), st.floats(0.2, 1.2), st.integers(1, 3))
def test_scale_covariance(text, s, t0, n):
    f = spec(text, "(0.01, 100)")
    fs = FunctionSpec(substitute(f.expr, Product((Const(s), Var()))), Interval(0.01, 10))
    d = np.diag([s ** k for k in range(1, n + 1)])
    want = d @ kraus_matrix(f, s * t0, n).entries @ d
    got = kraus_matrix(fs, t0, n).entries
    assert np.allclose(got, want, rtol=1e-10, atol=1e-10 * np.abs(want).max())


def test_negated_flips_convexity():
    f = spec("x^0.5")
    assert not grid_classify(f, 2, Kind.CONVEX).passed
    assert grid_classify(negated(f), 2, Kind.CONVEX).passed


def test_minor_eigen_coherence_on_suite():
    for text in SUITE:
        f = spec(text)
        for t in np.linspace(0.2, 3.8, 9):
            for kind in Kind:
                v = psd_test(derivative_matrix(f, float(t), 3, kind))
                if all(d > v.tolerance for d in v.minors):
                    assert v.classification is not Classification.INDEFINITE
