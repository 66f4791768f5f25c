import numpy as np
import pytest

from critframes import Ellipsoid, GaugeNorm, MinkowskiSum, PBall, PNorm, norm_eval, support
from critframes.errors import (
    EmptySum,
    ExponentOutOfRange,
    NonSymmetricGaugeBody,
    NotPositiveDefinite,
    SpecError,
    ZeroDirection,
    ZeroVector,
)
from critframes.geometry import build_body, build_norm, validate_and_build

from helpers import BODIES


def test_validate_and_build_examples():
    assert isinstance(validate_and_build({"type": "ellipsoid", "matrix": [[4, 0], [0, 1]]}), Ellipsoid)
    with pytest.raises(ExponentOutOfRange):
        validate_and_build({"type": "pball", "p": 1, "weights": [1, 1]})
    assert isinstance(validate_and_build({"type": "pball", "p": 4, "weights": [1, 2]}), PBall)


@pytest.mark.parametrize("raw, exc", [
    ({"type": "ellipsoid", "matrix": [[1, 0], [0, -1]]}, NotPositiveDefinite),
    ({"type": "ellipsoid", "matrix": [[1, 0.5], [0, 1]]}, NotPositiveDefinite),
    ({"type": "pball", "p": 0.5, "weights": [1, 1]}, ExponentOutOfRange),
    ({"type": "pball", "p": "inf", "weights": [1, 1]}, ExponentOutOfRange),
    ({"type": "pball", "p": 3, "weights": [1, 0]}, SpecError),
    ({"type": "sum", "parts": []}, EmptySum),
    ({"type": "sum", "parts": [{"type": "pball", "p": 3, "weights": [1, 1]},
                               {"type": "pball", "p": 3, "weights": [1, 1, 1]}]}, SpecError),
    ({"type": "pnorm", "p": 1}, ExponentOutOfRange),
    ({"type": "cube"}, SpecError),
    ({"type": "pball", "p": 3}, SpecError),
])
def test_invalid_specs(raw, exc):
    with pytest.raises(exc):
        validate_and_build(raw)


def test_json_round_trip():
    raw = {"type": "sum", "parts": [{"type": "pball", "p": 4.0, "weights": [1.0, 2.0]},
                                    {"type": "ellipsoid", "matrix": [[2.0, 0.0], [0.0, 1.0]]}]}
    body = build_body(raw)
    assert body.to_dict() == raw
    assert build_body(body.to_dict()) == body
    norm = build_norm({"type": "gauge", "body": raw})
    assert build_norm(norm.to_dict()) == norm


def test_support_closed_forms():
    s = support(Ellipsoid(np.diag([4.0, 1.0])), [1, 0])
    assert s.value == pytest.approx(2.0)
    np.testing.assert_allclose(s.point, [2, 0])
    s = support(PBall(4, [1, 1]), [1, 0])
    assert s.value == pytest.approx(1.0)
    np.testing.assert_allclose(s.point, [1, 0])


def test_support_pball_diagonal_against_boundary_sampling():
    # oracle: maximize <y, x> over 10^6 boundary samples of the p=4 unit ball
    t = np.linspace(0, 2 * np.pi, 10**6, endpoint=False)
    U = np.column_stack([np.cos(t), np.sin(t)])
    X = U / (np.sum(U**4, axis=1) ** 0.25)[:, None]
    scores = X @ np.array([1.0, 1.0])
    k = int(np.argmax(scores))
    oracle_value, oracle_point = scores[k], X[k]
    s = support(PBall(4, [1, 1]), [1, 1])
    assert abs(s.value - oracle_value) < 1e-6
    np.testing.assert_allclose(s.point, oracle_point, atol=1e-5)
    # frozen from the oracle
    assert s.value == pytest.approx(1.681792830507429, abs=1e-6)
    np.testing.assert_allclose(s.point, [2**-0.25, 2**-0.25], atol=1e-12)


def test_zero_direction_and_vector():
    with pytest.raises(ZeroDirection):
        support(PBall(3, [1, 1]), [0, 0])
    with pytest.raises(ZeroVector):
        norm_eval(PNorm(3), [0.0, 0.0])


def test_norm_eval_examples():
    v, g = norm_eval(PNorm(4, [1, 1]), [1, 0])
    assert v == pytest.approx(1.0)
    np.testing.assert_allclose(g, [1, 0])
    v, g = norm_eval(PNorm(2), [3, 4])
    assert v == pytest.approx(5.0)
    np.testing.assert_allclose(g, [0.6, 0.8])


def test_norm_eval_p4_diagonal_against_finite_differences():
    norm = PNorm(4)
    x = np.array([1.0, 1.0])
    h = 1e-6
    fd = [(norm(x + h * e) - norm(x - h * e)) / (2 * h) for e in np.eye(2)]
    v, g = norm_eval(norm, x)
    assert v == pytest.approx(2**0.25, rel=1e-14)
    np.testing.assert_allclose(g, fd, atol=1e-8)
    np.testing.assert_allclose(g, [0.5946035575013605] * 2, atol=1e-8)


def _random_body(rng, n):
    kind = rng.integers(3)
    if kind == 0:
        A = rng.standard_normal((n, n))
        return Ellipsoid(A @ A.T + 0.5 * np.eye(n))
    if kind == 1:
        return PBall(rng.uniform(1.3, 6), rng.uniform(0.5, 3, n))
    return MinkowskiSum([PBall(rng.uniform(1.5, 5), rng.uniform(0.5, 2, n)),
                         Ellipsoid(np.diag(rng.uniform(0.5, 2, n)))])


def test_support_homogeneity_and_subgradient(rng):
    for _ in range(100):
        n = int(rng.integers(2, 5))
        body = _random_body(rng, n)
        y = rng.standard_normal(n)
        lam = rng.uniform(0.01, 100)
        s1, s2 = body.support(y), body.support(lam * y)
        assert s2.value == pytest.approx(lam * s1.value, rel=1e-12)
        np.testing.assert_allclose(s2.point, s1.point, rtol=1e-10, atol=1e-12)
        assert y @ s1.point == pytest.approx(s1.value, rel=1e-12)
        assert s1.value > 0


def test_support_points_on_boundary(rng):
    for _ in range(50):
        n = int(rng.integers(2, 4))
        body = _random_body(rng, n)
        s = body.support(rng.standard_normal(n))
        g, _ = body.gauge(s.point)
        assert g == pytest.approx(1.0, abs=1e-10)


def test_minkowski_additivity(rng):
    parts = [PBall(3, [1, 2, 1]), Ellipsoid(np.diag([1.0, 2.0, 0.5])), PBall(1.7, [0.5, 1, 1])]
    body = MinkowskiSum(parts)
    for _ in range(20):
        y = rng.standard_normal(3)
        s = body.support(y)
        assert s.value == pytest.approx(sum(p.support(y).value for p in parts), rel=1e-14)
        np.testing.assert_allclose(s.point, sum(p.support(y).point for p in parts), rtol=1e-13)


def _random_norm(rng, n):
    kind = rng.integers(3)
    if kind == 0:
        return PNorm(rng.uniform(1.3, 6), rng.uniform(0.5, 3, n))
    if kind == 1:
        A = rng.standard_normal((n, n))
        return GaugeNorm(Ellipsoid(A @ A.T + 0.5 * np.eye(n)))
    return GaugeNorm(MinkowskiSum([PBall(rng.uniform(2, 5), rng.uniform(0.5, 2, n)),
                                   Ellipsoid(np.diag(rng.uniform(0.5, 2, n)))]))


def test_euler_identity_and_gradient_vs_fd(rng):
    h = 1e-6
    for _ in range(100):
        n = int(rng.integers(2, 4))
        norm = _random_norm(rng, n)
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        v, g = norm.evaluate(x)
        assert g @ x == pytest.approx(v, rel=1e-10)
        fd = (norm(x + h * y) - norm(x - h * y)) / (2 * h)
        assert abs(g @ y - fd) < 1e-6


def test_gauge_of_pball_matches_pnorm(rng):
    body, norm = PBall(3.5, [1, 2, 0.5]), PNorm(3.5, [1, 2, 0.5])
    for _ in range(10):
        x = rng.standard_normal(3)
        gv, gg = body.gauge(x)
        nv, ng = norm.evaluate(x)
        assert gv == pytest.approx(nv, rel=1e-14)
        np.testing.assert_allclose(gg, ng, rtol=1e-13)


def test_gauge_of_sum_is_consistent_with_support():
    body = BODIES["sum"]
    rng = np.random.default_rng(3)
    for _ in range(10):
        y = rng.standard_normal(2)
        s = body.support(y)
        g, grad = body.gauge(s.point)
        assert g == pytest.approx(1.0, abs=1e-12)
        # gradient of the gauge at a boundary point is the normal scaled by 1/s
        np.testing.assert_allclose(grad, y / s.value, rtol=1e-8)


class _ShiftedBall:
    dim = 2

    def support_many(self, Y):
        Y = np.atleast_2d(Y)
        r = np.linalg.norm(Y, axis=1)
        return r + Y @ np.array([0.3, 0.0]), Y / r[:, None] + np.array([0.3, 0.0])

    def to_dict(self):
        return {"type": "shifted"}


def test_gauge_norm_rejects_non_symmetric_body():
    with pytest.raises(NonSymmetricGaugeBody):
        GaugeNorm(_ShiftedBall())


def test_norm_properties():
    norm = PNorm(3, [1, 2])
    x = np.array([0.3, -1.2])
    assert norm(-x) == pytest.approx(norm(x))
    assert norm(2.5 * x) == pytest.approx(2.5 * norm(x))
    assert PNorm(2).is_euclidean and not PNorm(4).is_euclidean
