"""scikit-learn style front end to the multistart census."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import SpecError
from .frames import Frame, orbit_distance
from .geometry import ConvexBody, Norm, validate_and_build
from .solver import (
    BJProblem,
    ParallelotopeProblem,
    Problem,
    SolverConfig,
    multistart_census,
    verify_lower_bound,
)

__all__ = ["CriticalFrameCensus", "check_problem", "check_frames"]


def check_problem(X, dimension=None):
    """Problem from a Problem, a body/norm handle or a parsed JSON spec.

    Bodies give the parallelotope problem, norms the Birkhoff-James one.
    """
    if isinstance(X, Problem):
        return X
    handle = validate_and_build(X)
    if isinstance(handle, ConvexBody):
        return ParallelotopeProblem(handle)
    if isinstance(handle, Norm):
        return BJProblem(handle, n=dimension)
    raise SpecError(f"cannot build a problem from {type(X).__name__}")


def check_frames(frames, problem):
    """List of :class:`Frame` normalized for ``problem`` from frames or an
    ``(m, n, n)`` array (rows are vectors)."""
    if isinstance(frames, Frame):
        frames = [frames]
    out = []
    for f in frames:
        if not isinstance(f, Frame):
            f = Frame.from_vectors(np.asarray(f, dtype=float), problem.frame_norm)
        problem.check_frame(f)
        out.append(f)
    return out


class CriticalFrameCensus(BaseEstimator):
    """Find the critical W_n-orbits of a parallelotope or Birkhoff-James problem.

    ``fit(X)`` takes a convex body (outscribed parallelotopes), a norm
    (Birkhoff-James bases), either as a handle or a JSON-style dict, or a
    ready :class:`~critframes.solver.Problem`.

    Attributes
    ----------
    problem_ : Problem
    census_ : Census
    orbits_ : list of CriticalOrbit, sorted by objective
    bound_check_ : BoundsCheck against the n(n-1)/2 + 1 guarantee
    """

    def __init__(self, starts=200, random_state=0, tol_residual=1e-10, tol_merge=1e-6,
                 max_iters=50, fd_step=1e-7, nullity_tol=1e-5, det_floor=1e-6,
                 dimension=None, n_jobs=1):
        self.starts = starts
        self.random_state = random_state
        self.tol_residual = tol_residual
        self.tol_merge = tol_merge
        self.max_iters = max_iters
        self.fd_step = fd_step
        self.nullity_tol = nullity_tol
        self.det_floor = det_floor
        self.dimension = dimension
        self.n_jobs = n_jobs

    def _config(self):
        seed = self.random_state
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % 2**32)
        elif isinstance(seed, np.random.Generator):
            seed = int(seed.integers(2**32))
        return SolverConfig(starts=self.starts, master_seed=int(seed),
                            tol_residual=self.tol_residual, tol_merge=self.tol_merge,
                            max_iters=self.max_iters, fd_step=self.fd_step,
                            nullity_tol=self.nullity_tol, det_floor=self.det_floor)

    def fit(self, X, y=None):
        self.problem_ = check_problem(X, self.dimension)
        self.config_ = self._config()
        self.census_ = multistart_census(self.problem_, self.config_, jobs=self.n_jobs)
        self.orbits_ = list(self.census_.orbits)
        self.bound_check_ = verify_lower_bound(self.census_, self.problem_.n)
        self.n_orbits_ = len(self.orbits_)
        return self

    def transform(self, frames):
        """Orbit distance from each frame to each found orbit, shape (m, n_orbits)."""
        check_is_fitted(self, "orbits_")
        frames = check_frames(frames, self.problem_)
        return np.array([[orbit_distance(f, o.canonical_frame) for o in self.orbits_]
                         for f in frames]).reshape(len(frames), len(self.orbits_))

    def predict(self, frames):
        """Index of the orbit each frame lies on, or -1 beyond ``tol_merge``."""
        D = self.transform(frames)
        if D.shape[1] == 0:
            return np.full(D.shape[0], -1)
        idx = np.argmin(D, axis=1)
        return np.where(D[np.arange(len(idx)), idx] <= self.tol_merge, idx, -1)

    def fit_predict(self, X, frames):
        return self.fit(X).predict(frames)
