import json

import numpy as np
import pytest

from tmoga import metrics
from tmoga.benchgen import EventParams, gen_events, gen_synfix, gen_synvar
from tmoga.graph import load_dynamic


def inter_degree(snap, labels):
    e = snap.edges
    return 2 * np.sum(labels[e[:, 0]] != labels[e[:, 1]]) / snap.n


def test_synfix_z0_blocks():
    seq = gen_synfix(0, seed=1)
    for snap, truth in zip(seq.network, seq.truths):
        assert metrics.modularity(snap, truth) == pytest.approx(0.75, abs=0.03)
        assert inter_degree(snap, truth.labels) == 0


def test_synfix_shape_and_degrees():
    seq = gen_synfix(3, seed=2)
    assert seq.network.T == 10 and seq.network.n == 128
    for truth in seq.truths:
        assert truth.k == 4 and truth.sizes().sum() == 128
    deg = np.mean([s.degrees.mean() for s in seq.network])
    inter = np.mean([inter_degree(s, t.labels) for s, t in zip(seq.network, seq.truths)])
    assert deg == pytest.approx(16, abs=1)
    assert inter == pytest.approx(3, abs=1)
    assert all(len(e["nodes"]) == 12 for e in seq.event_log)


def test_synvar_trajectory():
    seq = gen_synvar(3, seed=3)
    assert seq.network.n == 256
    assert seq.community_counts() == [4, 5, 6, 7, 8, 8, 7, 6, 5, 4]
    assert sorted(seq.truths[0].sizes().tolist()) == [64] * 4
    assert sorted(seq.truths[4].sizes().tolist()) == [32] * 8
    assert sorted(seq.truths[9].sizes().tolist()) == sorted(seq.truths[0].sizes().tolist())
    deg = np.mean([s.degrees.mean() for s in seq.network])
    assert deg == pytest.approx(16, abs=1)


@pytest.mark.parametrize("make", [
    lambda s: gen_synfix(4, seed=s),
    lambda s: gen_synvar(4, seed=s),
    lambda s: gen_events("merge-split", EventParams(nodes=300), seed=s),
])
def test_seed_determinism(make):
    a, b = make(9), make(9)
    assert all(x == y for x, y in zip(a.network, b.network))
    assert a.truths == b.truths
    assert a.event_log == b.event_log


def test_birth_death_count_constant():
    seq = gen_events("birth-death", seed=4)
    counts = seq.community_counts()
    assert len(set(counts)) == 1
    births = [e for e in seq.event_log if e["event"] == "birth"]
    assert all(len(e["communities"]) == 3 for e in births)


def test_intermittent_hidden_nodes_are_isolated_singletons():
    seq = gen_events("intermittent", EventParams(nodes=400), seed=5)
    hides = [e for e in seq.event_log if e["event"] == "hide"]
    assert hides
    for event in hides:
        t = event["time"]
        snap, truth = seq.network[t - 1], seq.truths[t - 1]
        lonely = np.flatnonzero(truth.sizes()[truth.labels] == 1)
        # each hidden community had at least a handful of members
        assert len(lonely) >= 5 * len(event["communities"])
        assert np.all(snap.degrees[lonely] == 0)



def test_initial_sizes_and_infeasible_params():
    seq = gen_events("expand-contract", seed=6)
    sizes = seq.truths[0].sizes()
    assert sizes.min() >= 24 and sizes.max() <= 35 and sizes.sum() == 1000
    with pytest.raises(ValueError):
        gen_events("birth-death", EventParams(nodes=50, min_community=30, max_community=35))
    with pytest.raises(ValueError):
        gen_events("teleport")
    with pytest.raises(ValueError):
        gen_synfix(17)


def test_write_round_trip(tmp_path):
    seq = gen_events("intermittent", EventParams(nodes=200), seed=7)
    manifest = seq.write(tmp_path)
    assert manifest["community_counts"] == seq.community_counts()
    assert json.loads((tmp_path / "events.json").read_text()) == seq.event_log
    loaded = load_dynamic(tmp_path / "snapshots")
    assert loaded.T == seq.network.T
    assert sum(s.edge_count for s in loaded) == sum(s.edge_count for s in seq.network)
