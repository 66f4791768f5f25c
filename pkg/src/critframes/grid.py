"""Brute-force zero scan of the planar criticality residual.

Frames of R^2 are parameterized by two angles ``0 <= alpha < beta < pi``
(unordered pairs of lines, which quotients out most of W_2).  The residual
pair ``(r_12, r_21)`` is tabulated on a regular grid; cells across which
both components change sign are bisected down to 1e-10 and polished.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import AmbiguousCanonicalForm, DimensionUnsupported, SolverError, SpecError
from .frames import Frame, canonicalize, orbit_distance
from .solver import FAMILY_RTOL, _normalize_rows

log = logging.getLogger(__name__)

__all__ = ["GridZero", "scan_2d"]

CELL_TOL = 1e-10
MAX_ACTIVE = 8
DEGENERATE_RATIO = 1e-6


@dataclass
class GridZero:
    alpha: float
    beta: float
    frame: Frame
    residual_max: float
    objective: float
    degenerate: bool = False

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "frame": self.frame.to_list(),
            "residual_max": self.residual_max,
            "objective": self.objective,
            "degenerate": self.degenerate,
        }


class _Evaluator:
    def __init__(self, problem):
        self.problem = problem

    def chart(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        U = np.column_stack([np.cos(theta), np.sin(theta)])
        return _normalize_rows(U, self.problem.chart_norm)

    def factors(self, theta):
        return self.problem.factors(self.chart(theta))

    def residual(self, alpha, beta):
        """(r_12, r_21) at matching arrays of angles."""
        Aa, Ba = self.factors(alpha)
        Ab, Bb = self.factors(beta)
        return np.einsum("ij,ij->i", Aa, Bb), np.einsum("ij,ij->i", Ab, Ba)

    def frame(self, alpha, beta):
        Y = np.vstack([self.chart(alpha), self.chart(beta)])
        return self.problem.from_chart(Y)


def _straddles(values):
    return (values.min(axis=-1) <= 0.0) & (values.max(axis=-1) >= 0.0)


def _bisect(ev, cells):
    """Shrink sign-change cells ``(alpha_lo, beta_lo, size)`` to ``CELL_TOL``."""
    cells = np.asarray(cells, dtype=float)
    offsets = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    while cells.size and cells[0, 2] > CELL_TOL:
        half = cells[:, 2] / 2
        sub = np.repeat(cells, 4, axis=0)
        sub[:, 2] = np.repeat(half, 4)
        sub[:, :2] += np.tile(offsets, (len(cells), 1)) * sub[:, 2:3]
        ca = sub[:, 0:1] + offsets[None, :, 0] * sub[:, 2:3]
        cb = sub[:, 1:2] + offsets[None, :, 1] * sub[:, 2:3]
        r12, r21 = ev.residual(ca.ravel(), cb.ravel())
        keep = _straddles(r12.reshape(-1, 4)) & _straddles(r21.reshape(-1, 4))
        sub = sub[keep]
        if len(sub) > MAX_ACTIVE:
            m12, m21 = ev.residual(sub[:, 0] + sub[:, 2] / 2, sub[:, 1] + sub[:, 2] / 2)
            order = np.argsort(np.hypot(m12, m21), kind="stable")[:MAX_ACTIVE]
            sub = sub[np.sort(order)]
        cells = sub
    return cells


def _jacobian(ev, a, b, h=1e-7):
    fa = np.array(ev.residual([a + h, a - h], [b, b]))
    fb = np.array(ev.residual([a, a], [b + h, b - h]))
    return np.column_stack([(fa[:, 0] - fa[:, 1]) / (2 * h), (fb[:, 0] - fb[:, 1]) / (2 * h)])


def _polish(ev, a, b, steps=5):
    r = np.array([x[0] for x in ev.residual([a], [b])])
    for _ in range(steps):
        if np.max(np.abs(r)) == 0.0:
            break
        J = _jacobian(ev, a, b)
        da, db = np.linalg.lstsq(J, -r, rcond=1e-12)[0]
        if math.hypot(da, db) > 1e-6:
            break
        r_new = np.array([x[0] for x in ev.residual([a + da], [b + db])])
        if np.max(np.abs(r_new)) >= np.max(np.abs(r)):
            break
        a, b, r = a + da, b + db, r_new
    return a, b


def scan_2d(problem, resolution=600, merge_tol=1e-6):
    """Zero set of the residual of a planar ``problem``, as merged orbits."""
    if problem.n != 2:
        raise DimensionUnsupported(f"grid scan needs n = 2, got n = {problem.n}")
    if int(resolution) != resolution or resolution < 100:
        raise SpecError("resolution must be an integer >= 100")
    N = int(resolution)
    ev = _Evaluator(problem)
    theta = np.arange(N + 1) * (math.pi / N)
    A, B = ev.factors(theta)
    R12 = A @ B.T          # R12[a, b] = r_12 at (alpha, beta) = (theta_a, theta_b)
    R21 = R12.T

    def corners(R):
        return np.stack([R[:-1, :-1], R[:-1, 1:], R[1:, :-1], R[1:, 1:]], axis=-1)

    a_idx, b_idx = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    # cells strictly inside 0 < beta - alpha < pi, away from degenerate corners
    valid = (b_idx >= a_idx + 2) & (b_idx + 1 - a_idx <= N - 1)
    flagged = valid & _straddles(corners(R12)) & _straddles(corners(R21))
    labels, count = ndimage.label(flagged, structure=np.ones((3, 3)))
    log.info("grid scan: %d flagged cells in %d components", int(flagged.sum()), count)

    h = math.pi / N
    raw = []
    for lab in range(1, count + 1):
        ia, ib = np.nonzero(labels == lab)
        cells = np.column_stack([theta[ia], theta[ib], np.full(ia.size, h)])
        if len(cells) > MAX_ACTIVE:
            m12, m21 = ev.residual(cells[:, 0] + h / 2, cells[:, 1] + h / 2)
            cells = cells[np.sort(np.argsort(np.hypot(m12, m21), kind="stable")[:MAX_ACTIVE])]
        leaves = _bisect(ev, cells)
        if not len(leaves):
            continue
        m12, m21 = ev.residual(leaves[:, 0] + leaves[:, 2] / 2, leaves[:, 1] + leaves[:, 2] / 2)
        best = leaves[int(np.argmin(np.hypot(m12, m21)))]
        a, b = _polish(ev, best[0] + best[2] / 2, best[1] + best[2] / 2)
        s = np.linalg.svd(_jacobian(ev, a, b), compute_uv=False)
        degenerate = bool(s[0] == 0.0 or s[1] / s[0] < DEGENERATE_RATIO)
        try:
            frame = ev.frame(a, b)
        except SolverError:
            continue
        raw.append((a, b, frame, degenerate))
    return _merge(problem, raw, merge_tol)


def _merge(problem, raw, merge_tol):
    zeros = []
    for a, b, frame, degenerate in raw:
        try:
            canon, _ = canonicalize(frame)
        except AmbiguousCanonicalForm:
            canon = frame
        objective = problem.objective(canon)
        dup = False
        for z in zeros:
            if orbit_distance(z.frame, canon) <= merge_tol or (
                degenerate and z.degenerate
                and math.isclose(z.objective, objective, rel_tol=FAMILY_RTOL)
            ):
                dup = True
                break
        if not dup:
            zeros.append(GridZero(float(a), float(b), canon, problem.residual_max(canon),
                                  objective, degenerate))
    zeros.sort(key=lambda z: (z.objective, z.frame.vectors.ravel().tolist()))
    return zeros
