"""Small dense helpers: fraction-free determinants and PSD classification."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

DEFAULT_TOL = 1e-8


class Classification(str, Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    BOUNDARY_PSD = "BoundaryPSD"
    INDEFINITE = "Indefinite"

    @property
    def passes(self) -> bool:
        return self is not Classification.INDEFINITE


def bareiss_det(m) -> float:
    """Determinant by fraction-free (Bareiss) elimination with row pivoting.

    Works on floats or on exact ``Fraction``/``int`` entries.
    """
    a = [list(row) for row in m]
    n = len(a)
    if n == 0:
        return 1.0
    exact = all(isinstance(x, (int, Fraction)) for row in a for x in row)
    sign = 1
    prev = 1
    for k in range(n - 1):
        pivot = max(range(k, n), key=lambda r: abs(a[r][k]))
        if a[pivot][k] == 0:
            return Fraction(0) if exact else 0.0
        if pivot != k:
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = num / prev if not exact else Fraction(num) / prev
        prev = a[k][k]
    det = sign * a[n - 1][n - 1]
    return det if exact else float(det)


def leading_minors(m) -> list:
    """D_1..D_n, the determinants of the top-left m x m blocks."""
    n = len(m)
    return [bareiss_det([row[:k] for row in m[:k]]) for k in range(1, n + 1)]


@dataclass(frozen=True)
class PsdVerdict:
    min_eigenvalue: float
    minors: tuple
    classification: Classification
    tolerance: float
    scale: float = 1.0

    @property
    def score(self) -> float:
        """Minimum eigenvalue relative to the matrix scale (lower is worse)."""
        return self.min_eigenvalue / self.scale

    @property
    def passes(self) -> bool:
        return self.classification.passes

    def to_dict(self) -> dict:
        return {
            "min_eigenvalue": float(self.min_eigenvalue),
            "minors": [float(d) for d in self.minors],
            "classification": self.classification.value,
            "tolerance": float(self.tolerance),
        }


def psd_test(matrix, tol: float = DEFAULT_TOL) -> PsdVerdict:
    """Classify a real symmetric matrix.

    ``tol`` is relative: the threshold applied to the minimum eigenvalue is
    ``tol * max(1, ||M||_inf)``.  Accepts an ndarray or anything with an
    ``entries`` attribute.
    """
    a = np.asarray(getattr(matrix, "entries", matrix), dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("psd_test needs a square matrix")
    scale = max(1.0, float(np.abs(a).sum(axis=1).max()) if a.size else 1.0)
    scaled = tol * scale
    sym = 0.5 * (a + a.T)
    lam = float(np.linalg.eigvalsh(sym)[0]) if a.size else 0.0
    if lam > scaled:
        cls = Classification.POSITIVE_DEFINITE
    elif lam < -scaled:
        cls = Classification.INDEFINITE
    else:
        cls = Classification.BOUNDARY_PSD
    minors = tuple(float(d) for d in leading_minors(sym.tolist()))
    return PsdVerdict(lam, minors, cls, scaled, scale)


def minors_positive_definite(minors, tol: float) -> bool:
    """Sylvester's criterion with a tolerance on every leading minor."""
    return all(d > tol for d in minors)
