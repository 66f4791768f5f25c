"""Smooth strictly convex bodies and smooth norms given by closed-form oracles.

Every body contains the origin in its interior and is centrally symmetric
(ellipsoids centred at 0, weighted p-balls and Minkowski sums of those).
Bodies expose

* ``support(y)`` -> :class:`SupportEvaluation` (value and the unique support point),
* ``gauge(x)`` -> Minkowski functional and its gradient.

Norms expose ``evaluate(x)`` -> (value, gradient).  Batched ``*_many``
variants take an ``(m, n)`` array of row vectors.
"""
from __future__ import annotations

import json
import math
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .errors import (
    DimensionMismatch,
    EmptySum,
    ExponentOutOfRange,
    NonSymmetricGaugeBody,
    NotPositiveDefinite,
    SpecError,
    ZeroDirection,
    ZeroVector,
)

__all__ = [
    "SupportEvaluation",
    "ConvexBody",
    "Ellipsoid",
    "PBall",
    "MinkowskiSum",
    "Norm",
    "PNorm",
    "GaugeNorm",
    "validate_and_build",
    "build_body",
    "build_norm",
    "support",
    "norm_eval",
]

EIG_TOL = 1e-12
SYMMETRY_SAMPLES = 64


class SupportEvaluation(NamedTuple):
    value: float
    point: np.ndarray


def _as_rows(X, dim):
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if dim is not None and X.shape[1] != dim:
        raise DimensionMismatch(f"expected vectors of length {dim}, got {X.shape[1]}")
    return X, single


def _check_nonzero(X, exc):
    if not np.all(np.isfinite(X)):
        raise SpecError("non-finite vector component")
    if np.any(np.max(np.abs(X), axis=1) == 0.0):
        raise exc("zero vector")


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class _SpecEq:
    """Equality and hashing through the JSON representation."""

    def to_dict(self):  # pragma: no cover - abstract
        raise NotImplementedError

    def _key(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def __eq__(self, other):
        if not isinstance(other, _SpecEq):
            return NotImplemented
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        return hash((type(self).__name__, self._key()))

    def __repr__(self):
        return f"{type(self).__name__}({self._key()})"


# ---------------------------------------------------------------------------
# p-norm kernels shared by the p-ball support function and the p-norm


def _pnorm_rows(X, p):
    """Row-wise (value, gradient) of the plain p-norm, overflow safe."""
    m = np.max(np.abs(X), axis=1)
    Xs = X / m[:, None]
    A = np.abs(Xs)
    s = np.sum(A**p, axis=1)
    val = s ** (1.0 / p)
    grad = np.sign(Xs) * A ** (p - 1) / (val ** (p - 1))[:, None]
    return m * val, grad


class ConvexBody(_SpecEq):
    """Base class; subclasses implement ``support_many`` and ``gauge_many``."""

    dim: int
    # True when the gauge is C^2 away from 0 so that boundary points make a
    # smooth chart for the frame manifold.
    smooth_gauge: bool = False

    def support(self, direction) -> SupportEvaluation:
        y, _ = _as_rows(direction, self.dim)
        if y.shape[0] != 1:
            raise SpecError("support() takes a single direction; use support_many")
        vals, pts = self.support_many(y)
        return SupportEvaluation(float(vals[0]), pts[0])

    def support_many(self, Y):  # pragma: no cover - abstract
        raise NotImplementedError

    def gauge(self, x):
        vals, grads = self.gauge_many(np.atleast_2d(np.asarray(x, dtype=float)))
        return float(vals[0]), grads[0]

    def gauge_many(self, X):  # pragma: no cover - abstract
        raise NotImplementedError

    def boundary_points(self, m=256):
        """``m`` boundary points of a planar body, ordered by angle."""
        if self.dim != 2:
            raise SpecError("boundary_points is only defined for planar bodies")
        t = np.linspace(0.0, 2 * np.pi, m, endpoint=False)
        U = np.column_stack([np.cos(t), np.sin(t)])
        g, _ = self.gauge_many(U)
        return U / g[:, None]


class Ellipsoid(ConvexBody):
    """``{x : x^T A^{-1} x <= 1}``; support value ``sqrt(y^T A y)``."""

    smooth_gauge = True

    def __init__(self, matrix):
        A = np.asarray(matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise SpecError("ellipsoid matrix must be square")
        if not np.all(np.isfinite(A)):
            raise SpecError("ellipsoid matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(A))))
        if np.max(np.abs(A - A.T)) > 1e-12 * scale:
            raise NotPositiveDefinite("ellipsoid matrix is not symmetric")
        A = 0.5 * (A + A.T)
        eig = np.linalg.eigvalsh(A)
        if eig[0] <= EIG_TOL * max(1.0, abs(eig[-1])):
            raise NotPositiveDefinite(f"ellipsoid matrix eigenvalues {eig} not all positive")
        self.matrix = _readonly(A)
        self.inverse = _readonly(np.linalg.inv(A))
        self.dim = A.shape[0]

    def support_many(self, Y):
        Y, _ = _as_rows(Y, self.dim)
        _check_nonzero(Y, ZeroDirection)
        AY = Y @ self.matrix
        vals = np.sqrt(np.einsum("ij,ij->i", Y, AY))
        return vals, AY / vals[:, None]

    def gauge_many(self, X):
        X, _ = _as_rows(X, self.dim)
        _check_nonzero(X, ZeroVector)
        BX = X @ self.inverse
        vals = np.sqrt(np.einsum("ij,ij->i", X, BX))
        return vals, BX / vals[:, None]

    def to_dict(self):
        return {"type": "ellipsoid", "matrix": self.matrix.tolist()}


def _check_exponent(p):
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise SpecError(f"exponent must be a number, got {p!r}") from None
    if not (1.0 < p < math.inf):
        raise ExponentOutOfRange(f"exponent p={p} must satisfy 1 < p < inf")
    return p


def _check_weights(weights):
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise SpecError("weights must be a nonempty list of numbers")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise SpecError("weights must be finite and positive")
    return _readonly(w)


class PBall(ConvexBody):
    """``{x : sum |x_m / w_m|^p <= 1}`` with ``1 < p < inf``."""

    def __init__(self, p, weights):
        self.p = _check_exponent(p)
        self.q = self.p / (self.p - 1.0)
        self.weights = _check_weights(weights)
        self.dim = self.weights.size
        # |x|^p has a Lipschitz gradient iff p >= 2
        self.smooth_gauge = self.p >= 2.0

    def support_many(self, Y):
        Y, _ = _as_rows(Y, self.dim)
        _check_nonzero(Y, ZeroDirection)
        vals, U = _pnorm_rows(Y * self.weights, self.q)
        return vals, U * self.weights

    def gauge_many(self, X):
        X, _ = _as_rows(X, self.dim)
        _check_nonzero(X, ZeroVector)
        vals, G = _pnorm_rows(X / self.weights, self.p)
        return vals, G / self.weights

    def to_dict(self):
        return {"type": "pball", "p": self.p, "weights": self.weights.tolist()}


class MinkowskiSum(ConvexBody):
    """Support values and support points add over the parts."""

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise EmptySum("Minkowski sum needs at least one part")
        dims = {part.dim for part in parts}
        if len(dims) != 1:
            raise DimensionMismatch(f"Minkowski summands have dimensions {sorted(dims)}")
        self.parts = tuple(parts)
        self.dim = dims.pop()

    def support_many(self, Y):
        Y, _ = _as_rows(Y, self.dim)
        vals = np.zeros(Y.shape[0])
        pts = np.zeros_like(Y)
        for part in self.parts:
            v, p = part.support_many(Y)
            vals += v
            pts += p
        return vals, pts

    def gauge_many(self, X):
        X, _ = _as_rows(X, self.dim)
        _check_nonzero(X, ZeroVector)
        out = [_polar_gauge(self, x) for x in X]
        return np.array([o[0] for o in out]), np.array([o[1] for o in out])

    def to_dict(self):
        return {"type": "sum", "parts": [part.to_dict() for part in self.parts]}


def _polar_gauge(body, x):
    """Gauge of ``body`` at ``x`` as ``max_y <x, y> / s(y)``.

    The maximiser ``y*`` is the outer normal at ``x / g(x)`` and the gauge
    gradient is ``y* / s(y*)``.
    """
    x = np.asarray(x, dtype=float)
    xn = x / np.linalg.norm(x)

    def negh(y):
        v, p = body.support_many(y[None, :])
        v, p = v[0], p[0]
        xy = xn @ y
        return -xy / v, -(xn / v - xy * p / v**2)

    res = optimize.minimize(negh, xn, jac=True, method="BFGS", options={"gtol": 1e-13})
    y = res.x / np.linalg.norm(res.x)

    def stationarity(y):
        # zero iff grad h = 0 and |y| = 1; grad h is orthogonal to y
        return negh(y)[1] + (y @ y - 1.0) * y

    sol = optimize.root(stationarity, y, method="hybr", options={"xtol": 1e-15})
    if sol.success or np.max(np.abs(stationarity(sol.x))) < np.max(np.abs(stationarity(y))):
        y = sol.x / np.linalg.norm(sol.x)
    v, _ = body.support_many(y[None, :])
    grad = y / v[0]
    return float(grad @ x), grad


# ---------------------------------------------------------------------------
# norms


class Norm(_SpecEq):
    dim: int | None

    def evaluate(self, x):
        vals, grads = self.evaluate_many(np.atleast_2d(np.asarray(x, dtype=float)))
        return float(vals[0]), grads[0]

    def evaluate_many(self, X):  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, x):
        return self.evaluate(x)[0]

    def normalize_many(self, X):
        vals, _ = self.evaluate_many(X)
        return X / vals[:, None]


class PNorm(Norm):
    """``||x|| = (sum |x_m / w_m|^p)^(1/p)``; ``weights=None`` means all ones."""

    def __init__(self, p, weights=None):
        self.p = _check_exponent(p)
        self.weights = None if weights is None else _check_weights(weights)
        self.dim = None if weights is None else self.weights.size

    @property
    def is_euclidean(self):
        return self.p == 2.0 and (self.weights is None or np.all(self.weights == 1.0))

    def evaluate_many(self, X):
        X, _ = _as_rows(X, self.dim)
        _check_nonzero(X, ZeroVector)
        if self.weights is None:
            return _pnorm_rows(X, self.p)
        vals, G = _pnorm_rows(X / self.weights, self.p)
        return vals, G / self.weights

    def unit_ball(self, n=None):
        n = self.dim if self.dim is not None else n
        w = self.weights if self.weights is not None else np.ones(n)
        return PBall(self.p, w)

    def to_dict(self):
        d = {"type": "pnorm", "p": self.p}
        if self.weights is not None:
            d["weights"] = self.weights.tolist()
        return d


class GaugeNorm(Norm):
    """Minkowski functional of a centrally symmetric body."""

    def __init__(self, body, check_symmetry=True):
        if check_symmetry:
            _check_symmetric(body)
        self.body = body
        self.dim = body.dim

    def evaluate_many(self, X):
        return self.body.gauge_many(X)

    def unit_ball(self, n=None):
        return self.body

    def to_dict(self):
        return {"type": "gauge", "body": self.body.to_dict()}


def _check_symmetric(body, samples=SYMMETRY_SAMPLES):
    rng = np.random.default_rng(0)
    Y = rng.standard_normal((samples, body.dim))
    v_plus, _ = body.support_many(Y)
    v_minus, _ = body.support_many(-Y)
    if not np.allclose(v_plus, v_minus, rtol=1e-9, atol=0.0):
        raise NonSymmetricGaugeBody("gauge body is not centrally symmetric")


# ---------------------------------------------------------------------------
# construction from the JSON representation


def _require(raw, key):
    try:
        return raw[key]
    except (KeyError, TypeError):
        raise SpecError(f"spec is missing field {key!r}") from None


def build_body(raw) -> ConvexBody:
    if isinstance(raw, ConvexBody):
        return raw
    if not isinstance(raw, dict):
        raise SpecError(f"body spec must be an object, got {type(raw).__name__}")
    kind = raw.get("type")
    if kind == "ellipsoid":
        return Ellipsoid(_require(raw, "matrix"))
    if kind == "pball":
        return PBall(_require(raw, "p"), _require(raw, "weights"))
    if kind == "sum":
        parts = _require(raw, "parts")
        if not isinstance(parts, list):
            raise SpecError("sum parts must be a list")
        return MinkowskiSum([build_body(part) for part in parts])
    raise SpecError(f"unknown body type {kind!r}")


def build_norm(raw) -> Norm:
    if isinstance(raw, Norm):
        return raw
    if not isinstance(raw, dict):
        raise SpecError(f"norm spec must be an object, got {type(raw).__name__}")
    kind = raw.get("type")
    if kind == "pnorm":
        return PNorm(_require(raw, "p"), raw.get("weights"))
    if kind == "gauge":
        return GaugeNorm(build_body(_require(raw, "body")))
    raise SpecError(f"unknown norm type {kind!r}")


def validate_and_build(raw):
    """Checked oracle handle (body or norm) from a parsed JSON spec."""
    if isinstance(raw, (ConvexBody, Norm)):
        return raw
    kind = raw.get("type") if isinstance(raw, dict) else None
    if kind in ("pnorm", "gauge"):
        return build_norm(raw)
    return build_body(raw)


def support(body, direction) -> SupportEvaluation:
    return body.support(direction)


def norm_eval(norm, x):
    return norm.evaluate(x)
