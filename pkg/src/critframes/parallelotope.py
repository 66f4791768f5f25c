"""Parallelotopes outscribed around a convex body and their criticality."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrame, SpecError
from .frames import Frame

__all__ = [
    "Parallelotope",
    "outscribe",
    "volume",
    "criticality_residual",
    "volume_directional_derivative",
    "pair_factors",
]


@dataclass(frozen=True)
class Parallelotope:
    """``{x : lower_i <= <e_i, x> <= upper_i}`` for the frame normals ``e_i``.

    ``support_points[i, 0]`` lies on the lower facet, ``support_points[i, 1]``
    on the upper one.
    """

    frame: Frame
    lower: np.ndarray
    upper: np.ndarray
    support_points: np.ndarray

    @property
    def widths(self):
        return self.upper - self.lower

    @property
    def volume(self):
        return volume(self)

    def vertices(self):
        """All 2^n vertices, by solving ``<e_i, x> = lower_i or upper_i``."""
        E = self.frame.vectors
        n = E.shape[0]
        choices = np.array(list(itertools.product((0, 1), repeat=n)))
        rhs = np.where(choices == 1, self.upper, self.lower)
        return np.linalg.solve(E, rhs.T).T

    def to_dict(self):
        r = criticality_residual_from(self)
        return {
            "frame": self.frame.to_list(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "support_points": [[pm.tolist(), pp.tolist()] for pm, pp in self.support_points],
            "volume": volume(self),
            "residual_max": _offdiag_max(r),
        }


def _offdiag_max(R):
    return float(np.nanmax(np.abs(R))) if R.size > 1 else 0.0


def _check_euclidean(frame):
    if frame.norm is not None:
        raise SpecError("outscribed parallelotopes need a Euclidean-normalized frame")


def outscribe(body, frame: Frame) -> Parallelotope:
    _check_euclidean(frame)
    if body.dim != frame.n:
        raise SpecError(f"body dimension {body.dim} != frame size {frame.n}")
    E = frame.vectors
    vals, pts = body.support_many(np.vstack([E, -E]))
    n = frame.n
    upper = vals[:n]
    lower = -vals[n:]
    sp = np.stack([pts[n:], pts[:n]], axis=1)
    for a in (upper, lower, sp):
        a.setflags(write=False)
    return Parallelotope(frame, lower, upper, sp)


def volume(p: Parallelotope) -> float:
    """Closed form ``prod(upper - lower) / |det(frame)|``."""
    det = abs(np.linalg.det(p.frame.vectors))
    if det == 0.0:
        raise DegenerateFrame("frame is singular")
    return float(np.prod(p.upper - p.lower) / det)


def criticality_residual_from(p: Parallelotope):
    chords = p.support_points[:, 1] - p.support_points[:, 0]
    R = chords @ p.frame.vectors.T
    np.fill_diagonal(R, np.nan)
    return R


def criticality_residual(body, frame: Frame):
    """``r[i, j] = <p_+^i - p_-^i, e_j>`` for ``i != j``; diagonal is NaN."""
    return criticality_residual_from(outscribe(body, frame))


def volume_directional_derivative(body, frame: Frame, i, j):
    """d/dt of the outscribed volume when ``e_i`` turns towards ``e_j``.

    The volume is 0-homogeneous in each ``e_i`` and adding ``t e_j`` to row
    ``i`` leaves the determinant unchanged, so the derivative is
    ``volume * r[i, j] / width_i``.
    """
    if i == j:
        raise SpecError("directional derivative needs i != j")
    p = outscribe(body, frame)
    R = criticality_residual_from(p)
    return volume(p) * R[i, j] / (p.upper[i] - p.lower[i])


def pair_factors(body, normals):
    """Rows ``A_i = p_+ - p_-`` for each normal, so ``r[i, j] = <A_i, normals_j>``."""
    normals = np.asarray(normals, dtype=float)
    m = normals.shape[0]
    _, pts = body.support_many(np.vstack([normals, -normals]))
    return pts[:m] - pts[m:]
