"""Unit n-frames, the signed-permutation group W_n acting on them, and orbit tools."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import (
    AmbiguousCanonicalForm,
    DegenerateFrame,
    DegenerateResult,
    DimensionMismatch,
    SpecError,
    ZeroVectorAfterDisplacement,
)

__all__ = [
    "DET_FLOOR",
    "Frame",
    "GroupElement",
    "act",
    "canonicalize",
    "orbit_distance",
    "random_frame",
    "retract",
    "check_frame",
]

DET_FLOOR = 1e-10
UNIT_TOL = 1e-12
SIGN_TOL = 1e-9
RANDOM_DET_MIN = 1e-3
EXHAUSTIVE_MAX_N = 6


def _row_norms(X, norm):
    if norm is None:
        return np.linalg.norm(X, axis=1)
    vals, _ = norm.evaluate_many(X)
    return vals


class Frame:
    """An ordered basis of unit vectors, stored as the rows of ``vectors``.

    ``norm`` is ``None`` for Euclidean normalization, otherwise the
    :class:`~critframes.geometry.Norm` under which every vector has length 1.
    """

    __slots__ = ("vectors", "norm", "_det")

    def __init__(self, vectors, norm=None, *, det_floor=DET_FLOOR):
        V = np.array(vectors, dtype=float)
        if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] < 1:
            raise DimensionMismatch(f"a frame needs n vectors of length n, got shape {V.shape}")
        if not np.all(np.isfinite(V)):
            raise SpecError("frame has non-finite entries")
        lengths = _row_norms(V, norm)
        if np.max(np.abs(lengths - 1.0)) > UNIT_TOL:
            raise SpecError(f"frame vectors are not unit length: {lengths}")
        det = float(np.linalg.det(V))
        if not abs(det) > det_floor:
            raise DegenerateFrame(f"|det| = {abs(det):.3e} is below the floor {det_floor:.1e}")
        V.setflags(write=False)
        self.vectors = V
        self.norm = norm
        self._det = det

    @classmethod
    def from_vectors(cls, vectors, norm=None, *, det_floor=DET_FLOOR):
        """Normalize arbitrary nonzero vectors and build a frame."""
        V = np.array(vectors, dtype=float)
        if V.ndim != 2:
            raise DimensionMismatch("frame must be a list of vectors")
        lengths = _row_norms(V, norm)
        return cls(V / lengths[:, None], norm, det_floor=det_floor)

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def det(self):
        return self._det

    def to_list(self):
        return self.vectors.tolist()

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.vectors)

    def __repr__(self):
        return f"Frame({self.vectors.tolist()!r}, norm={self.norm!r})"

    def __reduce__(self):
        return (_rebuild_frame, (self.vectors, self.norm))


def _rebuild_frame(vectors, norm):
    f = Frame.__new__(Frame)
    V = np.array(vectors)
    V.setflags(write=False)
    f.vectors, f.norm, f._det = V, norm, float(np.linalg.det(V))
    return f


def _trusted_frame(V, norm):
    # internal constructor for results of exact sign/permutation operations
    return _rebuild_frame(V, norm)


def check_frame(frame, norm=None, *, normalize=False):
    """Coerce ``frame`` (a Frame or nested sequence) into a validated Frame."""
    if isinstance(frame, Frame):
        return frame
    if normalize:
        return Frame.from_vectors(frame, norm)
    return Frame(frame, norm)


@dataclass(frozen=True)
class GroupElement:
    """Element of W_n = (Z/2)^n x| Sym_n; ``perm`` is 0-based.

    Acting on a frame, output vector ``j`` is ``signs[perm[j]] * v[perm[j]]``.
    """

    signs: tuple
    perm: tuple

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        perm = tuple(int(p) for p in self.perm)
        if len(signs) != len(perm):
            raise DimensionMismatch("signs and permutation have different lengths")
        if any(s not in (1, -1) for s in signs):
            raise SpecError(f"signs must be +1/-1, got {signs}")
        if sorted(perm) != list(range(len(perm))):
            raise SpecError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "perm", perm)

    @property
    def n(self):
        return len(self.perm)

    @classmethod
    def identity(cls, n):
        return cls((1,) * n, tuple(range(n)))

    @classmethod
    def random(cls, rng, n):
        rng = np.random.default_rng(rng)
        return cls(tuple(rng.choice([-1, 1], size=n)), tuple(rng.permutation(n)))

    @staticmethod
    def order(n):
        return 2**n * math.factorial(n)

    @classmethod
    def elements(cls, n):
        for perm in itertools.permutations(range(n)):
            for signs in itertools.product((1, -1), repeat=n):
                yield cls(signs, perm)

    def __matmul__(self, other):
        """Composition ``self o other``: act(self @ other, f) == act(self, act(other, f))."""
        if other.n != self.n:
            raise DimensionMismatch("group elements of different rank")
        s, pi = self.signs, self.perm
        t, sigma = other.signs, other.perm
        perm = tuple(sigma[pi[j]] for j in range(self.n))
        sigma_inv = np.argsort(sigma)
        signs = tuple(s[sigma_inv[m]] * t[m] for m in range(self.n))
        return GroupElement(signs, perm)

    def inverse(self):
        pi = self.perm
        return GroupElement(tuple(self.signs[pi[m]] for m in range(self.n)),
                            tuple(int(i) for i in np.argsort(pi)))

    def apply_to_rows(self, V):
        idx = list(self.perm)
        return np.asarray(self.signs, dtype=float)[idx][:, None] * V[idx]

    def to_dict(self):
        return {"signs": list(self.signs), "perm": list(self.perm)}


def act(g: GroupElement, f: Frame) -> Frame:
    if g.n != f.n:
        raise DimensionMismatch(f"group element of rank {g.n} acting on {f.n}-frame")
    return _trusted_frame(g.apply_to_rows(f.vectors), f.norm)


def canonicalize(f: Frame):
    """Orbit representative of ``f`` and the group element mapping ``f`` to it.

    Each vector's first coordinate larger than 1e-9 in magnitude is made
    positive; vectors are then sorted in descending lexicographic order.
    """
    V = f.vectors
    n = f.n
    signs = []
    for v in V:
        nz = np.flatnonzero(np.abs(v) > SIGN_TOL)
        signs.append(-1 if nz.size and v[nz[0]] < 0 else 1)
    fixed = np.asarray(signs, dtype=float)[:, None] * V
    order = sorted(range(n), key=lambda m: tuple(-fixed[m]))
    for a, b in zip(order, order[1:]):
        if np.max(np.abs(fixed[a] - fixed[b])) <= SIGN_TOL:
            raise AmbiguousCanonicalForm("two frame vectors coincide up to sign")
    witness = GroupElement(tuple(signs), tuple(order))
    return _trusted_frame(fixed[order], f.norm), witness


def _slot_distances(f1, f2):
    # D[i, m]: best signed distance of f1's vector m placed in slot i of f2
    A, B = f1.vectors, f2.vectors
    minus = np.linalg.norm(B[:, None, :] - A[None, :, :], axis=2)
    plus = np.linalg.norm(B[:, None, :] + A[None, :, :], axis=2)
    return np.minimum(minus, plus)


_PERM_CACHE: dict = {}


def _permutations(n):
    if n not in _PERM_CACHE:
        _PERM_CACHE[n] = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    return _PERM_CACHE[n]


def _bottleneck_assignment(D):
    """Exact min over permutations of max_i D[i, perm[i]] by threshold matching."""
    n = D.shape[0]
    values = np.unique(D)
    lo, hi = 0, values.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        graph = csr_matrix((D <= values[mid]).astype(np.int8))
        matching = maximum_bipartite_matching(graph, perm_type="column")
        if np.all(matching >= 0):
            hi = mid
        else:
            lo = mid + 1
    return float(values[lo])


def orbit_distance(f1: Frame, f2: Frame) -> float:
    """``min_g max_i |act(g, f1)_i - f2_i|`` over the whole group W_n.

    Signs can be chosen slot by slot, so the minimum runs over permutations
    only: exhaustively for n <= 6, by exact bottleneck matching above.
    """
    if f1.n != f2.n:
        raise DimensionMismatch(f"frames of size {f1.n} and {f2.n}")
    if f1.norm != f2.norm:
        raise SpecError("frames have different normalizations")
    D = _slot_distances(f1, f2)
    n = f1.n
    if n <= EXHAUSTIVE_MAX_N:
        P = _permutations(n)
        return float(np.min(np.max(D[np.arange(n), P], axis=1)))
    return _bottleneck_assignment(D)


def random_frame(rng, n, norm=None) -> Frame:
    """Frame with vectors drawn uniformly from the Euclidean sphere, then
    rescaled to unit ``norm``; redrawn until ``|det| > 1e-3``."""
    if n < 2:
        raise SpecError("random frames need n >= 2")
    rng = np.random.default_rng(rng)
    while True:
        G = rng.standard_normal((n, n))
        G /= np.linalg.norm(G, axis=1)[:, None]
        if norm is not None:
            G /= _row_norms(G, norm)[:, None]
        if abs(np.linalg.det(G)) > RANDOM_DET_MIN:
            return Frame(G, norm)


def retract(f: Frame, displacements, *, det_floor=DET_FLOOR) -> Frame:
    """Vector ``i`` becomes ``e_i + d_i`` rescaled to unit length."""
    D = np.asarray(displacements, dtype=float)
    if D.shape != f.vectors.shape:
        raise DimensionMismatch(f"displacements shape {D.shape} != frame shape {f.vectors.shape}")
    Y = f.vectors + D
    if np.any(np.max(np.abs(Y), axis=1) == 0.0):
        raise ZeroVectorAfterDisplacement("displaced vector is zero")
    Y = Y / _row_norms(Y, f.norm)[:, None]
    det = np.linalg.det(Y)
    if not abs(det) > det_floor:
        raise DegenerateResult(f"retracted frame has |det| = {abs(det):.3e}")
    Y.setflags(write=False)
    out = Frame.__new__(Frame)
    out.vectors, out.norm, out._det = Y, f.norm, float(det)
    return out


def elementary_displacements(f: Frame, T):
    """Displacements ``d_i = sum_{j != i} T[i, j] e_j``."""
    T = np.array(T, dtype=float)
    np.fill_diagonal(T, 0.0)
    return T @ f.vectors
