import numpy as np
import pytest

from spectral_pgo.graph import dumps_pose_graph, is_connected
from spectral_pgo.lie import compose, inverse, log_map
from spectral_pgo.synth import SynthSpec, random_information, synthesize


def test_chain_shape():
    g = synthesize(SynthSpec(nodes=10))
    assert (g.n, g.m) == (10, 9)
    assert all(e.k == e.i + 1 for e in g.edges)
    assert is_connected(g)


def test_deterministic_in_seed():
    spec = SynthSpec(nodes=40, dim=3, loop_prob=0.3, info="corr", eta=0.4, seed=7)
    assert dumps_pose_graph(synthesize(spec)) == dumps_pose_graph(synthesize(spec))
    other = SynthSpec(nodes=40, dim=3, loop_prob=0.3, info="corr", eta=0.4, seed=8)
    assert dumps_pose_graph(synthesize(other)) != dumps_pose_graph(synthesize(spec))


def test_loop_closures_respect_span():
    g = synthesize(SynthSpec(nodes=200, loop_prob=0.5, span=10, seed=1))
    loops = [e for e in g.edges if e.k != e.i + 1]
    assert loops
    assert all(2 <= e.k - e.i <= 10 for e in loops)


@pytest.mark.parametrize("dim", [2, 3])
def test_measurements_near_ground_truth(dim):
    g = synthesize(SynthSpec(nodes=30, dim=dim, loop_prob=0.3, seed=2))
    for e in g.edges:
        truth = compose(inverse(g.poses[e.i]), g.poses[e.k])
        err = log_map(compose(inverse(truth), e.measurement))
        assert np.linalg.norm(err) < 0.1


@pytest.mark.parametrize("model", ["iso", "diag", "corr"])
@pytest.mark.parametrize("ell", [3, 6])
def test_information_models_are_pd(model, ell):
    rng = np.random.default_rng(0)
    for _ in range(50):
        info = random_information(rng, ell, model, eta=0.9)
        np.testing.assert_array_equal(info, info.T)
        assert np.linalg.eigvalsh(info)[0] > 0
        if model == "iso":
            np.testing.assert_array_equal(info, info[0, 0] * np.eye(ell))
        if model != "corr":
            np.testing.assert_array_equal(info, np.diag(np.diag(info)))


@pytest.mark.parametrize(
    "kwargs", [dict(nodes=0), dict(nodes=5, dim=4), dict(nodes=5, loop_prob=2.0),
               dict(nodes=5, span=1), dict(nodes=5, info="x"), dict(nodes=5, eta=1.0)]
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SynthSpec(**kwargs)
