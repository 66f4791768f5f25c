import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from critframes import CriticalFrameCensus, Frame, GroupElement, PBall, PNorm, act
from critframes.errors import SpecError

P4_SPEC = {"type": "pball", "p": 4, "weights": [1, 2]}


def test_params_round_trip():
    est = CriticalFrameCensus(starts=30, random_state=4)
    params = est.get_params()
    assert params["starts"] == 30 and params["random_state"] == 4
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(starts=10)
    assert est.starts == 10


def test_fit_on_spec_and_handle_agree():
    a = CriticalFrameCensus(starts=40, random_state=7).fit(P4_SPEC)
    b = CriticalFrameCensus(starts=40, random_state=7).fit(PBall(4, [1, 2]))
    assert a.n_orbits_ == b.n_orbits_ >= 2
    assert a.census_.to_dict() == b.census_.to_dict()
    assert a.bound_check_.satisfied


def test_predict_assigns_group_images_to_their_orbit():
    est = CriticalFrameCensus(starts=40, random_state=7).fit(P4_SPEC)
    rng = np.random.default_rng(0)
    frames = [act(GroupElement.random(rng, 2), o.canonical_frame) for o in est.orbits_]
    np.testing.assert_array_equal(est.predict(frames), np.arange(est.n_orbits_))
    D = est.transform(frames)
    assert D.shape == (est.n_orbits_, est.n_orbits_)
    assert np.all(np.diag(D) < 1e-12)
    assert est.predict([[[1, 0.3], [0.1, 1]]])[0] == -1


def test_fit_predict_bj_norm():
    est = CriticalFrameCensus(starts=40, random_state=1, dimension=2)
    labels = est.fit_predict({"type": "pnorm", "p": 4}, [np.eye(2), [[1, 1], [1, -1]]])
    assert sorted(labels) == [0, 1]
    assert isinstance(est.orbits_[0].canonical_frame, Frame)
    assert est.problem_.norm == PNorm(4)


def test_unfitted_and_invalid():
    with pytest.raises(NotFittedError):
        CriticalFrameCensus().predict([np.eye(2)])
    with pytest.raises(SpecError):
        CriticalFrameCensus(starts=0).fit(P4_SPEC)
    with pytest.raises(SpecError):
        CriticalFrameCensus().fit({"type": "pball", "p": 1, "weights": [1, 1]})
