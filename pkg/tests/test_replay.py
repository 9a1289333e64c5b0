import math

import numpy as np
import pytest

from spectral_pgo.criteria import Criterion, fim_criteria, graph_estimate
from spectral_pgo.fim import assemble_fim
from spectral_pgo.graph import PoseGraph, prefix
from spectral_pgo.replay import (
    ReplayConfig,
    complexity_probe,
    evaluate_step,
    replay,
    summarize,
    trend_agreement,
)
from spectral_pgo.synth import SynthSpec, synthesize

from conftest import PHI_BAR


@pytest.fixture(scope="module")
def small_graph():
    return synthesize(SynthSpec(nodes=30, loop_prob=0.2, info="corr", eta=0.3, seed=4))


def test_replay_matches_direct_computation(small_graph):
    config = ReplayConfig(criteria=("t", "d", "e", "emax"))
    records = replay(small_graph, config)
    assert [r.step for r in records] == list(range(3, 31))
    for r in records[::7]:
        sub = prefix(small_graph, r.step)
        direct = fim_criteria(assemble_fim(sub), config.criteria)
        for c in config.criteria:
            e = r.get(c)
            assert e.fim_value == pytest.approx(direct[c], rel=1e-10)
            assert e.graph_value == pytest.approx(graph_estimate(sub, c), rel=1e-10)
            assert e.bound_violated is None
            assert e.fim_time_ns > 0 and e.graph_time_ns > 0


def test_stride_and_start(small_graph):
    records = replay(small_graph, ReplayConfig(stride=5, start=4))
    assert [r.step for r in records] == [4, 9, 14, 19, 24, 29]


def test_disconnected_prefix_skipped():
    g = PoseGraph.from_edges(5, [(0, 1), (1, 2), (3, 4), (2, 4)])
    records = replay(g, ReplayConfig(criteria=("t",)))
    assert [r.step for r in records] == [3, 5]


def test_constant_weighting_allows_a(small_graph):
    config = ReplayConfig(criteria=tuple(Criterion), weighting="constant", constant_info=PHI_BAR)
    records = replay(small_graph, config)
    for r in records:
        for e in r.entries:
            assert e.rel_error < 1e-9


def test_infinity_weighting_flags(small_graph):
    records = replay(small_graph, ReplayConfig(weighting="infinity"))
    flags = [e.bound_violated for r in records for e in r.entries]
    assert all(f is False for f in flags)


@pytest.mark.parametrize(
    "kwargs",
    [dict(criteria=()), dict(weighting="x"), dict(weighting="constant"),
     dict(criteria=("a",)), dict(stride=0), dict(start=1), dict(repetitions=0)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ReplayConfig(**kwargs)


def test_trend_agreement():
    assert trend_agreement([1, 2, 3], [1, 2, 3]) == 1.0
    assert trend_agreement([1, 2, 1], [1, 2, 3]) == 0.5
    assert trend_agreement([1, 1, 2], [1, 2, 3]) == 1.0
    assert trend_agreement([1, 1, 2], [1, 2, 3], zero_delta_agrees=False) == 0.5
    assert math.isnan(trend_agreement([1], [1]))


def test_summary(small_graph):
    records = replay(small_graph, ReplayConfig())
    s = summarize(records)
    assert (s.n, s.m) == (small_graph.n, small_graph.m)
    t = s.criteria[Criterion.T]
    assert t.max_rel_error < 1e-12 and t.trend_agreement == 1.0 and t.steps == len(records)
    assert s.fim_time_ns > 0 and s.time_reduction < 1.0
    with pytest.raises(ValueError):
        summarize([])


def test_evaluate_step_repetitions(small_graph):
    r = evaluate_step(small_graph, ReplayConfig(repetitions=3))
    assert r.n == small_graph.n and len(r.entries) == 4


def test_complexity_probe_rows():
    rows = complexity_probe([20, 40])
    assert [r.n for r in rows] == [20, 40]
    assert all(r.ratio > 0 for r in rows)
    with pytest.raises(ValueError):
        complexity_probe([40, 20])
