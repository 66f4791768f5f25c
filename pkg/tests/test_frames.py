import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critframes import Frame, GroupElement, PNorm, act, canonicalize, orbit_distance, random_frame, retract
from critframes.errors import (
    AmbiguousCanonicalForm,
    DegenerateFrame,
    DegenerateResult,
    DimensionMismatch,
    SpecError,
    ZeroVectorAfterDisplacement,
)


def brute_force_orbit_distance(f1, f2):
    n = f1.n
    return min(
        np.max(np.linalg.norm(act(g, f1).vectors - f2.vectors, axis=1))
        for g in GroupElement.elements(n)
    )


def test_frame_invariants():
    with pytest.raises(SpecError):
        Frame([[2, 0], [0, 1]])
    with pytest.raises(DegenerateFrame):
        Frame([[1, 0], [1, 0]])
    f = Frame.from_vectors([[3, 4], [0, 2]])
    np.testing.assert_allclose(f.vectors, [[0.6, 0.8], [0, 1]])
    with pytest.raises(ValueError):
        f.vectors[0, 0] = 1.0


def test_act_examples():
    f = Frame(np.eye(2))
    assert act(GroupElement.identity(2), f).vectors.tolist() == f.vectors.tolist()
    g = GroupElement((-1, 1), (0, 1))
    np.testing.assert_array_equal(act(g, f).vectors, [[-1, 0], [0, 1]])


def test_group_element_validation():
    with pytest.raises(SpecError):
        GroupElement((1, 2), (0, 1))
    with pytest.raises(SpecError):
        GroupElement((1, 1), (0, 0))
    with pytest.raises(DimensionMismatch):
        GroupElement((1,), (0, 1))
    assert GroupElement.order(3) == 48
    assert len(set(GroupElement.elements(3))) == 48


def test_action_law_random(rng):
    for _ in range(100):
        n = int(rng.integers(2, 5))
        g, h = GroupElement.random(rng, n), GroupElement.random(rng, n)
        f = random_frame(rng, n)
        np.testing.assert_allclose(act(g, act(h, f)).vectors, act(g @ h, f).vectors, atol=0)
        assert abs(act(g, f).det) == pytest.approx(abs(f.det), rel=1e-12)


def test_group_axioms_exhaustive_n2():
    els = list(GroupElement.elements(2))
    e = GroupElement.identity(2)
    for a in els:
        assert a @ e == a and e @ a == a
        assert a @ a.inverse() == e and a.inverse() @ a == e
        for b, c in itertools.product(els, els):
            assert (a @ b) @ c == a @ (b @ c)


@pytest.mark.parametrize("n", [3, 4])
def test_group_axioms_random(rng, n):
    for _ in range(50):
        a, b, c = (GroupElement.random(rng, n) for _ in range(3))
        assert (a @ b) @ c == a @ (b @ c)
        assert a @ a.inverse() == GroupElement.identity(n)


def test_canonicalize_example():
    canon, w = canonicalize(Frame([[0, -1], [1, 0]]))
    np.testing.assert_array_equal(canon.vectors, [[1, 0], [0, 1]])
    assert w.signs == (-1, 1) and w.perm == (1, 0)
    np.testing.assert_array_equal(act(w, Frame([[0, -1], [1, 0]])).vectors, canon.vectors)


def test_canonicalize_idempotent_and_orbit_constant(rng):
    for _ in range(100):
        n = int(rng.integers(2, 5))
        f = random_frame(rng, n)
        canon, w = canonicalize(f)
        np.testing.assert_array_equal(canonicalize(canon)[0].vectors, canon.vectors)
        np.testing.assert_array_equal(act(w, f).vectors, canon.vectors)
        g = GroupElement.random(rng, n)
        np.testing.assert_array_equal(canonicalize(act(g, f))[0].vectors, canon.vectors)


def test_canonicalize_ambiguous():
    # two vectors equal up to sign cannot form a basis; equality is checked after sign fixing
    f = Frame([[1, 0], [-1, 1e-12]], det_floor=1e-14)
    with pytest.raises(AmbiguousCanonicalForm):
        canonicalize(f)


def test_orbit_distance_rotation_against_enumeration():
    c, s = math.cos(math.radians(10)), math.sin(math.radians(10))
    f1, f2 = Frame(np.eye(2)), Frame([[c, s], [-s, c]])
    oracle = brute_force_orbit_distance(f1, f2)
    assert orbit_distance(f1, f2) == pytest.approx(oracle, abs=1e-15)
    assert orbit_distance(f1, f2) == pytest.approx(2 * math.sin(math.radians(5)), abs=1e-12)
    assert orbit_distance(f1, f2) == pytest.approx(0.17431148549531633, abs=1e-12)


def test_orbit_distance_matches_enumeration_random(rng):
    for n in (2, 3):
        for _ in range(20):
            f1, f2 = random_frame(rng, n), random_frame(rng, n)
            assert orbit_distance(f1, f2) == pytest.approx(brute_force_orbit_distance(f1, f2), abs=1e-14)


def test_orbit_distance_properties(rng):
    for _ in range(50):
        n = int(rng.integers(2, 5))
        f, g = random_frame(rng, n), GroupElement.random(rng, n)
        assert orbit_distance(f, act(g, f)) == pytest.approx(0.0, abs=1e-15)
        a, b, c = f, random_frame(rng, n), random_frame(rng, n)
        assert orbit_distance(a, b) == pytest.approx(orbit_distance(b, a), abs=1e-15)
        assert orbit_distance(a, c) <= orbit_distance(a, b) + orbit_distance(b, c) + 1e-15
        V = np.array(f.vectors)
        delta = 1e-3
        V[0] += delta * np.linalg.svd(V)[2][-1]  # direction orthogonal-ish, any unit vector
        assert orbit_distance(f, Frame.from_vectors(V)) <= delta + 1e-12


def test_orbit_distance_large_n_matching(rng):
    # n = 7 goes through bottleneck matching; compare with exhaustive permutations
    n = 7
    f = random_frame(rng, n)
    g = GroupElement.random(rng, n)
    assert orbit_distance(f, act(g, f)) == 0.0
    f2 = random_frame(rng, n)
    A, B = f.vectors, f2.vectors
    D = np.minimum(np.linalg.norm(B[:, None] - A[None], axis=2), np.linalg.norm(B[:, None] + A[None], axis=2))
    exhaustive = min(max(D[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
    assert orbit_distance(f, f2) == pytest.approx(exhaustive, abs=1e-15)


def test_orbit_distance_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        orbit_distance(Frame(np.eye(2)), Frame(np.eye(3)))


def test_random_frame_determinism_and_postconditions():
    a = random_frame(np.random.default_rng(5), 3)
    b = random_frame(np.random.default_rng(5), 3)
    np.testing.assert_array_equal(a.vectors, b.vectors)
    rng = np.random.default_rng(11)
    norm = PNorm(4, [1, 2, 3])
    for _ in range(1000):
        f = random_frame(rng, 3, norm)
        assert abs(f.det) > 1e-3
        np.testing.assert_allclose(norm.evaluate_many(f.vectors)[0], 1.0, atol=1e-12)


def test_random_frame_coordinates_centered():
    rng = np.random.default_rng(2)
    samples = np.array([random_frame(rng, 3).vectors for _ in range(100_000 // 3 + 1)])
    np.testing.assert_allclose(samples.reshape(-1, 3).mean(axis=0), 0.0, atol=0.02)


def test_retract_examples():
    f = Frame(np.eye(2))
    np.testing.assert_array_equal(retract(f, np.zeros((2, 2))).vectors, f.vectors)
    out = retract(f, [[0, 1], [0, 0]])
    np.testing.assert_allclose(out.vectors[0], np.array([1, 1]) / math.sqrt(2), atol=1e-15)
    p4 = PNorm(4)
    out = retract(Frame(np.eye(2), p4), [[0, 1], [0, 0]])
    np.testing.assert_allclose(out.vectors[0], np.array([1, 1]) / 2**0.25, atol=1e-15)


def test_retract_errors():
    f = Frame(np.eye(2))
    with pytest.raises(ZeroVectorAfterDisplacement):
        retract(f, [[-1, 0], [0, 0]])
    with pytest.raises(DegenerateResult):
        retract(f, [[-1, 1], [0, 0]])


def test_frame_pickles():
    import pickle

    f = Frame.from_vectors(np.eye(2), PNorm(3, [1, 2]))
    g = pickle.loads(pickle.dumps(f))
    np.testing.assert_array_equal(g.vectors, f.vectors)
    assert g.norm == f.norm


@st.composite
def group_elements(draw, n):
    perm = draw(st.permutations(range(n)))
    signs = draw(st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n))
    return GroupElement(tuple(signs), tuple(perm))


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5).flatmap(lambda n: st.tuples(group_elements(n), group_elements(n),
                                                     st.integers(0, 2**32 - 1))))
def test_inverse_and_orbit_distance_property(data):
    g, h, seed = data
    f = random_frame(np.random.default_rng(seed), g.n)
    np.testing.assert_array_equal(act(g.inverse(), act(g, f)).vectors, f.vectors)
    assert orbit_distance(act(g, f), act(h, f)) == 0.0
    np.testing.assert_array_equal(canonicalize(act(g @ h, f))[0].vectors, canonicalize(f)[0].vectors)
