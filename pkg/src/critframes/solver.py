"""Multistart Newton search for critical frames, orbit merging and Morse data.

Both variational problems have pairwise residuals ``r[i, j] = <A(v_i), B(v_j)>``
over ordered pairs ``i != j``: exactly ``n(n-1)`` equations on the
``n(n-1)``-dimensional frame manifold.  Newton runs in a *chart*: a frame of
unit vectors (under the chart's norm) that maps smoothly onto the problem's
frame.  For the parallelotope problem on bodies with a C^2 gauge the chart
vectors are the support points themselves, which keeps the residual smooth
at flat boundary points where the support map is only Hölder continuous.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bj as _bj
from . import parallelotope as _par
from .bounds import critical_count_lower
from .errors import (
    AmbiguousCanonicalForm,
    DegenerateFrame,
    NoConvergence,
    NotCritical,
    SingularJacobian,
    SolverError,
    SpecError,
    ZeroVectorAfterDisplacement,
)
from .frames import Frame, canonicalize, orbit_distance, random_frame
from .geometry import ConvexBody, GaugeNorm, Norm, _check_symmetric, build_body, build_norm

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "Problem",
    "ParallelotopeProblem",
    "BJProblem",
    "CriticalOrbit",
    "Census",
    "BoundsCheck",
    "newton_refine",
    "classify_critical",
    "multistart_census",
    "verify_lower_bound",
]

SINGULAR_COND = 1e12
FAMILY_RTOL = 1e-6
MAX_HALVINGS = 40


@dataclass(frozen=True)
class SolverConfig:
    starts: int = 200
    master_seed: int = 0
    tol_residual: float = 1e-10
    tol_merge: float = 1e-6
    max_iters: int = 50
    fd_step: float = 1e-7
    hessian_step: float = 1e-5
    nullity_tol: float = 1e-5
    det_floor: float = 1e-6

    def __post_init__(self):
        for name in ("tol_residual", "tol_merge", "fd_step", "hessian_step", "nullity_tol", "det_floor"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise SpecError(f"{name} must be a positive number, got {value!r}")
        if int(self.starts) != self.starts or self.starts < 1:
            raise SpecError(f"starts must be a positive integer, got {self.starts!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise SpecError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if int(self.master_seed) != self.master_seed or self.master_seed < 0:
            raise SpecError(f"master_seed must be a non-negative integer, got {self.master_seed!r}")

    def to_dict(self):
        return asdict(self)


def _normalize_rows(Y, norm):
    if norm is None:
        lengths = np.linalg.norm(Y, axis=1)
    else:
        lengths, _ = norm.evaluate_many(Y)
    return Y / lengths[:, None]


class Problem:
    """Common Newton/chart machinery; subclasses define the residual factors."""

    kind = ""
    n: int
    frame_norm = None
    chart_norm = None

    def factors(self, Y):  # pragma: no cover - abstract
        raise NotImplementedError

    def normals(self, Y):
        """Problem frame vectors for chart vectors ``Y``."""
        return Y

    def to_chart(self, frame: Frame):
        return np.array(frame.vectors)

    def objective_chart(self, Y):  # pragma: no cover - abstract
        raise NotImplementedError

    def objective_vectors(self, E):  # pragma: no cover - abstract
        raise NotImplementedError

    # frame-level API

    def from_chart(self, Y) -> Frame:
        return Frame(self.normals(Y), self.frame_norm)

    def residual_matrix(self, frame: Frame):  # pragma: no cover - abstract
        raise NotImplementedError

    def residual(self, frame: Frame):
        R = self.residual_matrix(frame)
        return R[~np.eye(self.n, dtype=bool)]

    def residual_max(self, frame: Frame):
        return float(np.max(np.abs(self.residual(frame))))

    def objective(self, frame: Frame):  # pragma: no cover - abstract
        raise NotImplementedError

    def chart_residual(self, Y):
        A, B = self.factors(Y)
        return (A @ B.T)[~np.eye(self.n, dtype=bool)]

    def check_frame(self, frame: Frame):
        if frame.n != self.n:
            raise SpecError(f"problem has n={self.n}, frame has n={frame.n}")
        if frame.norm != self.frame_norm:
            raise SpecError("frame normalization does not match the problem")


class ParallelotopeProblem(Problem):
    """Critically outscribed parallelotopes around ``body``; objective = volume."""

    kind = "parallelotope"

    def __init__(self, body, chart="auto"):
        self.body = build_body(body) if not isinstance(body, ConvexBody) else body
        self.n = self.body.dim
        if chart == "auto":
            chart = "points" if getattr(self.body, "smooth_gauge", False) else "normals"
        if chart == "points":
            _check_symmetric(self.body)
            self.chart_norm = GaugeNorm(self.body, check_symmetry=False)
        elif chart == "normals":
            self.chart_norm = None
        else:
            raise SpecError(f"unknown chart {chart!r}")
        self.chart = chart

    def normals(self, Y):
        if self.chart == "normals":
            return Y
        _, G = self.body.gauge_many(Y)
        return G / np.linalg.norm(G, axis=1)[:, None]

    def to_chart(self, frame):
        if self.chart == "normals":
            return np.array(frame.vectors)
        _, pts = self.body.support_many(frame.vectors)
        return _normalize_rows(pts, self.chart_norm)

    def factors(self, Y):
        E = self.normals(Y)
        return _par.pair_factors(self.body, E), E

    def objective_chart(self, Y):
        return self.objective_vectors(self.normals(Y))

    def objective_vectors(self, E):
        vals, _ = self.body.support_many(np.vstack([E, -E]))
        widths = vals[: self.n] + vals[self.n:]
        return float(np.prod(widths) / abs(np.linalg.det(E)))

    def residual_matrix(self, frame):
        return _par.criticality_residual(self.body, frame)

    def objective(self, frame):
        return _par.volume(_par.outscribe(self.body, frame))

    def to_dict(self):
        return {"problem": self.kind, "body": self.body.to_dict()}


class BJProblem(Problem):
    """Birkhoff-James orthonormal bases of ``norm``; objective = 1/|det|."""

    kind = "bj"

    def __init__(self, norm, n=None):
        self.norm = build_norm(norm) if not isinstance(norm, Norm) else norm
        n = self.norm.dim if self.norm.dim is not None else n
        if n is None:
            raise SpecError("dimension-free norm needs an explicit n")
        if self.norm.dim is not None and self.norm.dim != n:
            raise SpecError(f"norm has dimension {self.norm.dim}, not {n}")
        self.n = int(n)
        self.frame_norm = self.norm
        self.chart_norm = self.norm

    def factors(self, Y):
        _, G = self.norm.evaluate_many(Y)
        return G, Y

    def objective_chart(self, Y):
        return 1.0 / abs(np.linalg.det(Y))

    objective_vectors = objective_chart

    def residual_matrix(self, frame):
        return _bj.bj_residual_matrix(self.norm, frame)

    def objective(self, frame):
        return 1.0 / abs(frame.det)

    def to_dict(self):
        return {"problem": self.kind, "norm": self.norm.to_dict(), "n": self.n}


# ---------------------------------------------------------------------------
# Newton refinement


def _chart_step(problem, Y, T):
    T = np.array(T, dtype=float)
    np.fill_diagonal(T, 0.0)
    Z = Y + T @ Y
    if np.any(np.max(np.abs(Z), axis=1) == 0.0):
        raise ZeroVectorAfterDisplacement("displaced chart vector is zero")
    return _normalize_rows(Z, problem.chart_norm)


def _pairs(n):
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def _jacobian(problem, Y, r0, h):
    n = problem.n
    pairs = _pairs(n)
    J = np.empty((len(pairs), len(pairs)))
    for col, (i, j) in enumerate(pairs):
        T = np.zeros((n, n))
        T[i, j] = h
        J[:, col] = (problem.chart_residual(_chart_step(problem, Y, T)) - r0) / h
    return J


def _frame_det(problem, Y):
    return abs(np.linalg.det(problem.normals(Y)))


def _polish(problem, Y, r, config):
    """One extra full Newton step, kept only if it lowers the residual."""
    try:
        J = _jacobian(problem, Y, r, config.fd_step)
        step = np.linalg.lstsq(J, -r, rcond=1e-12)[0]
        T = np.zeros((problem.n, problem.n))
        for (i, j), t in zip(_pairs(problem.n), step):
            T[i, j] = t
        Y_new = _chart_step(problem, Y, T)
        r_new = problem.chart_residual(Y_new)
    except (DegenerateFrame, ZeroVectorAfterDisplacement, np.linalg.LinAlgError):
        return Y, r
    if np.max(np.abs(r_new)) < np.max(np.abs(r)) and _frame_det(problem, Y_new) >= config.det_floor:
        return Y_new, r_new
    return Y, r


def _refine_chart(problem, Y, config, on_singular="raise"):
    """Newton iterations in the chart; returns (Y, iterations, singular_seen)."""
    n = problem.n
    pairs = _pairs(n)
    r = problem.chart_residual(Y)
    singular_seen = False
    for it in range(config.max_iters + 1):
        if np.max(np.abs(r)) <= config.tol_residual:
            if it > 0:
                Y, r = _polish(problem, Y, r, config)
            return Y, it, singular_seen
        if it == config.max_iters:
            break
        J = _jacobian(problem, Y, r, config.fd_step)
        cond = np.linalg.cond(J)
        if not cond <= SINGULAR_COND:
            singular_seen = True
            if on_singular == "raise":
                raise SingularJacobian(f"Jacobian condition number {cond:.3e}", cond=cond)
            step = np.linalg.lstsq(J, -r, rcond=1e-12)[0]
        else:
            step = np.linalg.solve(J, -r)
        T = np.zeros((n, n))
        for (i, j), t in zip(pairs, step):
            T[i, j] = t
        f0 = r @ r
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            try:
                Y_new = _chart_step(problem, Y, lam * T)
                if _frame_det(problem, Y_new) < config.det_floor:
                    raise DegenerateFrame("trial step degenerate")
                r_new = problem.chart_residual(Y_new)
            except (DegenerateFrame, ZeroVectorAfterDisplacement):
                lam *= 0.5
                continue
            if np.all(np.isfinite(r_new)) and r_new @ r_new <= (1.0 - 1e-4 * lam) * f0:
                break
            lam *= 0.5
        else:
            raise NoConvergence(f"line search stalled at residual {np.max(np.abs(r)):.3e}")
        Y, r = Y_new, r_new
    raise NoConvergence(f"no convergence in {config.max_iters} iterations "
                        f"(residual {np.max(np.abs(r)):.3e})")


def newton_refine(problem: Problem, start: Frame, config: SolverConfig = SolverConfig(),
                  on_singular="raise", return_info=False):
    """Damped Newton refinement of ``start`` to a critical frame.

    With ``on_singular="lstsq"`` ill-conditioned Jacobians (continua of
    critical frames) take minimum-norm least-squares steps instead of
    raising :class:`SingularJacobian`.
    """
    problem.check_frame(start)
    if abs(start.det) < config.det_floor:
        raise DegenerateFrame(f"start |det| = {abs(start.det):.3e} below {config.det_floor:.1e}")
    Y0 = problem.to_chart(start)
    Y, iterations, singular = _refine_chart(problem, Y0, config, on_singular)
    if iterations == 0:
        frame = start
    else:
        frame = problem.from_chart(Y)
    if return_info:
        return frame, {"iterations": iterations, "singular": singular}
    return frame


# ---------------------------------------------------------------------------
# classification


def hessian(problem, frame, step=1e-5):
    """Central-difference Hessian of the objective along the elementary
    directions of the frame manifold (slot ``i`` turned towards ``e_j``)."""
    E0 = np.array(frame.vectors)
    n = problem.n
    pairs = _pairs(n)
    m = len(pairs)

    def f(coeffs):
        T = np.zeros((n, n))
        for (i, j), c in coeffs:
            T[i, j] += c
        return problem.objective_vectors(_normalize_rows(E0 + T @ E0, problem.frame_norm))

    f0 = problem.objective_vectors(E0)
    H = np.empty((m, m))
    for a in range(m):
        pa = pairs[a]
        H[a, a] = (f([(pa, step)]) - 2 * f0 + f([(pa, -step)])) / step**2
        for b in range(a):
            pb = pairs[b]
            H[a, b] = H[b, a] = (
                f([(pa, step), (pb, step)]) - f([(pa, step), (pb, -step)])
                - f([(pa, -step), (pb, step)]) + f([(pa, -step), (pb, -step)])
            ) / (4 * step**2)
    return H


def classify_critical(problem, frame, config: SolverConfig = SolverConfig()):
    """(morse_index, hessian_nullity) from the finite-difference Hessian."""
    res = problem.residual_max(frame)
    if res > config.tol_residual:
        raise NotCritical(f"residual {res:.3e} exceeds {config.tol_residual:.1e}")
    eig = np.linalg.eigvalsh(hessian(problem, frame, config.hessian_step))
    scale = float(np.max(np.abs(eig)))
    thresh = config.nullity_tol * scale
    index = int(np.sum(eig < -thresh))
    nullity = int(np.sum(np.abs(eig) <= thresh))
    return index, nullity


# ---------------------------------------------------------------------------
# census


@dataclass
class CriticalOrbit:
    canonical_frame: Frame
    objective: float
    residual_max: float
    morse_index: int | None
    hessian_nullity: int
    hits: int = 1
    degenerate: bool = False

    def to_dict(self):
        return {
            "canonical_frame": self.canonical_frame.to_list(),
            "objective": self.objective,
            "residual_max": self.residual_max,
            "morse_index": self.morse_index,
            "hessian_nullity": self.hessian_nullity,
            "hits": self.hits,
            "degenerate": self.degenerate,
        }


@dataclass
class BoundsCheck:
    found: int
    required: int
    satisfied: bool

    def to_dict(self):
        return asdict(self)


@dataclass
class Census:
    """Census outcome: the orbits plus bookkeeping about the starts."""

    orbits: list
    config: SolverConfig
    converged: int = 0
    failures: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.orbits)

    def __len__(self):
        return len(self.orbits)

    def __getitem__(self, item):
        return self.orbits[item]

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "starts": self.config.starts,
            "converged": self.converged,
            "failures": dict(sorted(self.failures.items())),
            "orbits": [o.to_dict() for o in self.orbits],
        }


def start_frame(problem, config, index):
    """Deterministic start ``index`` of a census seeded by ``config.master_seed``."""
    rng = np.random.default_rng(np.random.SeedSequence([config.master_seed, index]))
    return random_frame(rng, problem.n, problem.frame_norm)


def _refine_start(args):
    problem, config, index = args
    try:
        frame = newton_refine(problem, start_frame(problem, config, index), config,
                              on_singular="lstsq")
    except (SolverError, ZeroVectorAfterDisplacement) as exc:
        return index, None, type(exc).__name__
    return index, frame.vectors, None


def _run_starts(problem, config, jobs):
    tasks = [(problem, config, i) for i in range(config.starts)]
    if jobs is None or jobs <= 1:
        return [_refine_start(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_refine_start, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def merge_frames(frames, tol_merge):
    """Canonicalize ``frames`` and merge them by orbit distance.

    Returns a list of ``[canonical_frame, hits]`` in first-seen order.
    """
    reps = []
    for frame in frames:
        try:
            canon, _ = canonicalize(frame)
        except AmbiguousCanonicalForm:
            canon = frame
        for rep in reps:
            if orbit_distance(rep[0], canon) <= tol_merge:
                rep[1] += 1
                break
        else:
            reps.append([canon, 1])
    return reps


def _merge_families(orbits):
    """Collapse degenerate orbits sitting on one critical level into a family."""
    out = []
    for orb in orbits:
        if orb.degenerate:
            for fam in out:
                if fam.degenerate and math.isclose(fam.objective, orb.objective,
                                                   rel_tol=FAMILY_RTOL):
                    fam.hits += orb.hits
                    fam.hessian_nullity = max(fam.hessian_nullity, orb.hessian_nullity)
                    break
            else:
                out.append(orb)
        else:
            out.append(orb)
    return out


def build_orbits(problem, frames, config):
    """Merge converged frames into classified, sorted :class:`CriticalOrbit` s."""
    orbits = []
    for canon, hits in merge_frames(frames, config.tol_merge):
        res = problem.residual_max(canon)
        try:
            index, nullity = classify_critical(problem, canon, config)
        except (SolverError, ZeroVectorAfterDisplacement):
            index, nullity = None, 0
        orbits.append(CriticalOrbit(
            canonical_frame=canon,
            objective=problem.objective(canon),
            residual_max=res,
            morse_index=index,
            hessian_nullity=nullity,
            hits=hits,
            degenerate=nullity > 0,
        ))
    orbits = _merge_families(orbits)
    orbits.sort(key=lambda o: (o.objective, o.canonical_frame.vectors.ravel().tolist()))
    return orbits


def multistart_census(problem: Problem, config: SolverConfig = SolverConfig(), jobs=1) -> Census:
    """Refine ``config.starts`` seeded random frames and merge the results.

    Start ``i`` draws from ``SeedSequence([master_seed, i])`` so a census
    with more starts extends one with fewer.  Merging is sequential in start
    index, which keeps the output independent of ``jobs``.
    """
    results = sorted(_run_starts(problem, config, jobs), key=lambda t: t[0])
    frames, failures = [], {}
    for _, V, reason in results:
        if V is None:
            failures[reason] = failures.get(reason, 0) + 1
        else:
            frames.append(Frame(V, problem.frame_norm))
    log.info("census: %d/%d starts converged", len(frames), config.starts)
    return Census(build_orbits(problem, frames, config), config, len(frames), failures)


def verify_lower_bound(census, n) -> BoundsCheck:
    required = critical_count_lower(n)
    found = len(census)
    return BoundsCheck(found=found, required=required, satisfied=found >= required)
