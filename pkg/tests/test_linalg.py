from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from matconvex.linalg import (Classification, bareiss_det, leading_minors,
                              minors_positive_definite, psd_test)


def test_psd_examples():
    v = psd_test(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert v.classification is Classification.BOUNDARY_PSD
    assert v.minors == (1.0, 0.0)
    v = psd_test(np.array([[3.0, 1.0], [1.0, 0.0]]))
    assert v.classification is Classification.INDEFINITE and v.minors[-1] == -1.0
    v = psd_test(np.array([[1 / 2, 1 / 6], [1 / 6, 1 / 24]]))
    assert v.classification is Classification.INDEFINITE
    assert abs(v.minors[-1] + 1 / 144) < 1e-16


def test_positive_definite_and_passes():
    v = psd_test(np.eye(3))
    assert v.classification is Classification.POSITIVE_DEFINITE and v.passes
    assert Classification.BOUNDARY_PSD.passes and not Classification.INDEFINITE.passes


def test_bareiss_exact_with_fractions():
    m = [[Fraction(1, 2), Fraction(1, 6)], [Fraction(1, 6), Fraction(1, 24)]]
    assert bareiss_det(m) == Fraction(-1, 144)
    assert leading_minors(m) == [Fraction(1, 2), Fraction(-1, 144)]


def test_bareiss_needs_pivoting():
    assert bareiss_det([[0, 1], [1, 0]]) == -1
    assert bareiss_det([[0, 0], [0, 1]]) == 0


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-10, 10)))
def test_bareiss_matches_numpy(m):
    want = np.linalg.det(m)
    assert abs(bareiss_det(m.tolist()) - want) <= 1e-9 * max(1.0, np.abs(m).max() ** 4)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (3, 3), elements=st.floats(-5, 5)))
def test_minor_eigen_coherence(a):
    m = a @ a.T if a[0, 0] > 0 else a + a.T
    v = psd_test(m)
    tol = v.tolerance
    if minors_positive_definite(v.minors, tol):
        # Sylvester: clearly positive minors rule out a negative eigenvalue
        assert v.classification is not Classification.INDEFINITE
    if v.min_eigenvalue > 1e-3:
        assert all(d > 0 for d in v.minors)


def test_verdict_to_dict_is_plain():
    d = psd_test(np.eye(2)).to_dict()
    assert d["classification"] == "PositiveDefinite"
    assert all(isinstance(x, float) for x in d["minors"])


def test_rejects_non_square():
    with pytest.raises(ValueError):
        psd_test(np.zeros((2, 3)))
