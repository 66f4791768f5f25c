"""Birkhoff-James orthogonality residuals and the 1/|det| objective."""
from __future__ import annotations

import numpy as np

from .errors import DegenerateFrame, SpecError
from .frames import Frame

__all__ = ["bj_residual", "bj_residual_matrix", "det_objective_and_derivative"]


def bj_residual(norm, x, y) -> float:
    """``d/dt ||x + t y||`` at ``t = 0``; zero iff ``x`` is BJ-orthogonal to ``y``."""
    _, grad = norm.evaluate(x)
    return float(grad @ np.asarray(y, dtype=float))


def bj_residual_matrix(norm, f: Frame):
    """Entry ``(i, j)`` is ``bj_residual(norm, e_i, e_j)``; NaN on the diagonal.

    Not symmetrized: the relation is not symmetric for non-Euclidean norms.
    """
    _, G = norm.evaluate_many(f.vectors)
    R = G @ f.vectors.T
    np.fill_diagonal(R, np.nan)
    return R


def det_objective_and_derivative(norm, f: Frame, i, j):
    """``1/|det f|`` and the t-derivative at 0 of
    ``1/det(e_1, ..., (e_i + t e_j)/||e_i + t e_j||, ..., e_n)``.

    Adding ``t e_j`` to row ``i`` keeps the determinant, so the derivative is
    ``bj_residual(e_i, e_j) / det f``.
    """
    if i == j:
        raise SpecError("derivative needs i != j")
    det = np.linalg.det(f.vectors)
    if det == 0.0:
        raise DegenerateFrame("frame is singular")
    objective = 1.0 / abs(det)
    V = f.vectors
    return objective, bj_residual(norm, V[i], V[j]) / det
