import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmoga import metrics
from tmoga.graph import Partition, Snapshot
import oracles
from oracles import BARBELL

K3 = Snapshot.from_edges(3, [(0, 1), (1, 2), (0, 2)])
BAR = Snapshot.from_edges(6, BARBELL)


def test_modularity_examples():
    assert metrics.modularity(BAR, [0, 0, 0, 0, 0, 0]) == pytest.approx(0.0, abs=1e-15)
    assert metrics.modularity(BAR, [0, 0, 0, 1, 1, 1]) == pytest.approx(5 / 14, abs=1e-15)
    assert metrics.modularity(K3, [0, 1, 2]) == pytest.approx(-1 / 3, abs=1e-15)


def test_modularity_needs_edges():
    with pytest.raises(metrics.UndefinedMetricError):
        metrics.modularity(Snapshot.from_edges(3, []), [0, 1, 2])


def test_nmi_examples():
    assert metrics.nmi([0, 0, 1, 1], [0, 0, 1, 1]) == pytest.approx(1.0)
    assert metrics.nmi([0, 0, 0, 0], [0, 0, 1, 1]) == pytest.approx(0.0, abs=1e-15)
    assert metrics.nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-15)
    assert metrics.nmi([0, 0, 0], [1, 1, 1]) == 1.0
    with pytest.raises(ValueError):
        metrics.nmi([0, 1], [0, 1, 2])


def test_community_score_examples():
    assert metrics.community_score(K3, [0, 0, 0]) == pytest.approx(8 / 3)
    assert metrics.community_score(K3, [0, 1, 2]) == 0.0
    assert metrics.community_score(BAR, [0, 0, 0, 1, 1, 1]) == pytest.approx(16 / 3)


def test_cid_examples():
    assert metrics.cid(K3, [0, 1, 2]) == 1.0
    path = Snapshot.from_edges(3, [(0, 1), (1, 2)])
    assert metrics.cid(path, [0, 1, 2]) == pytest.approx(2 / 3)
    assert metrics.cid(Snapshot.from_edges(2, []), [0, 1]) == 0.0
    with pytest.raises(metrics.UndefinedMetricError):
        metrics.cid(K3, [0])


def test_confusion_examples():
    c = metrics.confusion([0, 0, 1, 1], [0, 0, 1, 1])
    assert c.counts.tolist() == [[2, 0], [0, 2]]
    assert metrics.confusion([0, 0, 1, 1], [0, 1, 0, 1]).counts.tolist() == [[1, 1], [1, 1]]
    c = metrics.confusion([0, 0, 0, 0], [0, 1, 2, 3])
    assert c.counts.tolist() == [[1, 1, 1, 1]]
    assert c.n == 4 and c.row_sums.tolist() == [4] and c.col_sums.tolist() == [1, 1, 1, 1]


def random_instance(rnd):
    n = rnd.randint(2, 12)
    edges = oracles.random_graph(rnd, n, rnd.random())
    labels = oracles.random_labels(rnd, n, rnd.randint(1, n))
    return n, edges, labels


def test_metrics_match_brute_force():
    rnd = random.Random(7)
    checked = 0
    for _ in range(300):
        n, edges, labels = random_instance(rnd)
        snap = Snapshot.from_edges(n, edges)
        if edges:
            assert abs(metrics.modularity(snap, labels) - oracles.modularity(n, edges, labels)) <= 1e-12
            checked += 1
        assert abs(metrics.community_score(snap, labels) - oracles.community_score(n, edges, labels)) <= 1e-12
        other = oracles.random_labels(rnd, n, rnd.randint(1, n))
        assert abs(metrics.nmi(labels, other) - oracles.nmi(labels, other)) <= 1e-12
        nodes = rnd.sample(range(n), rnd.randint(2, n))
        assert abs(metrics.cid(snap, nodes) - oracles.cid(n, edges, nodes)) <= 1e-12
    assert checked > 200


label_vectors = st.lists(st.integers(0, 5), min_size=2, max_size=25)


@given(label_vectors, st.data())
def test_nmi_symmetric_and_bounded(a, data):
    b = data.draw(st.lists(st.integers(0, 5), min_size=len(a), max_size=len(a)))
    x, y = metrics.nmi(a, b), metrics.nmi(b, a)
    assert abs(x - y) <= 1e-12
    assert -1e-12 <= x <= 1 + 1e-12


@given(label_vectors)
def test_nmi_self_is_one(a):
    if len(set(a)) >= 2:
        assert metrics.nmi(a, a) == pytest.approx(1.0, abs=1e-12)


@given(st.integers(2, 12), st.integers(0, 10 ** 6))
def test_modularity_range_and_whole_graph(n, seed):
    rnd = random.Random(seed)
    edges = oracles.random_graph(rnd, n, 0.5)
    if not edges:
        return
    snap = Snapshot.from_edges(n, edges)
    q = metrics.modularity(snap, oracles.random_labels(rnd, n, n))
    assert -0.5 - 1e-12 <= q <= 1 + 1e-12
    assert metrics.modularity(snap, [0] * n) == pytest.approx(0.0, abs=1e-12)


@given(st.integers(3, 10), st.integers(0, 10 ** 6))
def test_cid_monotone_under_edge_addition(n, seed):
    rnd = random.Random(seed)
    edges = oracles.random_graph(rnd, n, 0.4)
    nodes = list(range(n))
    before = metrics.cid(Snapshot.from_edges(n, edges), nodes)
    u, v = rnd.sample(nodes, 2)
    after = metrics.cid(Snapshot.from_edges(n, edges + [(u, v)]), nodes)
    assert after >= before
    complete = [(i, j) for i in range(n) for j in range(i + 1, n)]
    assert metrics.cid(Snapshot.from_edges(n, complete), nodes) == 1.0


def test_accepts_partition_objects():
    p = Partition([0, 0, 0, 1, 1, 1])
    assert metrics.modularity(BAR, p) == metrics.modularity(BAR, np.array([0, 0, 0, 1, 1, 1]))
