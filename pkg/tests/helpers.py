"""Shared bodies, norms and a test-only linear image wrapper."""
import numpy as np

from critframes import Ellipsoid, MinkowskiSum, PBall, PNorm

ACCEPTANCE_RESULTS = []


def record(criterion, passed, detail=""):
    ACCEPTANCE_RESULTS.append((criterion, passed, detail))


class LinearImage:
    """T(K) for a body K, through s_{TK}(y) = s_K(T^T y)."""

    def __init__(self, body, T):
        self.body, self.T = body, np.asarray(T, dtype=float)
        self.dim = body.dim

    def support_many(self, Y):
        vals, pts = self.body.support_many(np.atleast_2d(Y) @ self.T)
        return vals, pts @ self.T.T


BODIES = {
    "ellipsoid": Ellipsoid([[4.0, 1.0], [1.0, 2.0]]),
    "pball4": PBall(4, [1, 2]),
    "pball1.5": PBall(1.5, [1, 3]),
    "sum": MinkowskiSum([PBall(3, [1, 2]), Ellipsoid([[2.0, 0.5], [0.5, 1.0]])]),
    "ellipsoid3": Ellipsoid([[3.0, 0.5, 0.2], [0.5, 2.0, 0.1], [0.2, 0.1, 1.0]]),
    "pball4_3": PBall(4, [1, 1.5, 2.25]),
    "pball3_3": PBall(3, [2, 1, 1.5]),
}

NORMS = {
    "p4": PNorm(4, [1, 2]),
    "p3": PNorm(3, [1, 0.5]),
    "p1.5": PNorm(1.5, [2, 1]),
    "p4_3": PNorm(4, [1, 1.5, 2.25]),
    "p3_3": PNorm(3, [2, 1, 1.5]),
}
