"""Decide, certify and refute matrix monotonicity and matrix convexity of
order n for scalar functions on real intervals."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .expr import FunctionSpec, Interval, evaluate, parse  # noqa: E402
from .jets import Jet, derivative, jet_lift  # noqa: E402
from .linalg import Classification, PsdVerdict, psd_test  # noqa: E402
from .criteria import (Kind, classify_power, dobsch_matrix, grid_classify,  # noqa: E402
                       kraus_matrix, strict_check)
from .calculus import (apply_function, convexity_gap, definitional_test,  # noqa: E402
                       kraus_divided_matrix, monotonicity_gap, random_hermitian)
from .polylab import (Polynomial, Target, construct_strict_polynomial,  # noqa: E402
                      gap_polynomial_search)
