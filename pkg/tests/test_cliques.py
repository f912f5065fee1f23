import io
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tmoga.cliques import CliqueSet, extract_all, extract_cliques
from tmoga.graph import Partition, Snapshot
from tmoga.metrics import cid
import oracles
from oracles import BARBELL


def check_invariants(snap, communities, result, threshold, max_depth):
    seen = set()
    for clique in result:
        s = set(clique)
        assert not s & seen
        seen |= s
        assert any(s <= set(c) for c in communities)
        whole = any(s == set(c) for c in communities)
        assert len(s) >= 3
        assert whole or len(s) <= max_depth
        assert cid(snap, s) >= threshold - 1e-12


def test_small_community_is_skipped():
    snap = Snapshot.from_edges(2, [(0, 1)])
    assert len(extract_cliques(snap, [0, 1], 0.8, 5)) == 0


def test_dense_community_returned_whole():
    k4 = Snapshot.from_edges(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
    assert [sorted(c) for c in extract_cliques(k4, range(4), 0.8, 5)] == [[0, 1, 2, 3]]


def test_barbell_threshold_one():
    snap = Snapshot.from_edges(6, BARBELL)
    got = sorted(sorted(c) for c in extract_cliques(snap, range(6), 1.0, 5))
    assert got == [[0, 1, 2], [3, 4, 5]]


def test_extract_all_examples():
    snap = Snapshot.from_edges(6, BARBELL)
    assert len(extract_all(snap, Partition.singletons(6), 0.8, 5)) == 0
    got = extract_all(snap, Partition([0, 0, 0, 1, 1, 1]), 0.8, 5, source_snapshot=3)
    assert sorted(sorted(c) for c in got) == [[0, 1, 2], [3, 4, 5]]
    assert got.source_snapshot == 3


def test_random_community_threshold_one():
    rnd = random.Random(11)
    edges = oracles.random_graph(rnd, 20, 0.5)
    snap = Snapshot.from_edges(20, edges)
    got = extract_cliques(snap, range(20), 1.0, 4)
    assert len(got) > 0
    for c in got:
        assert cid(snap, c) == 1.0
        assert 3 <= len(c) <= 4


def test_threshold_zero_returns_communities_whole():
    rnd = random.Random(5)
    snap = Snapshot.from_edges(12, oracles.random_graph(rnd, 12, 0.3))
    part = Partition([0] * 5 + [1] * 2 + [2] * 5)
    got = sorted(sorted(c) for c in extract_all(snap, part, 0.0, 3))
    assert got == [[0, 1, 2, 3, 4], [7, 8, 9, 10, 11]]


@given(st.integers(3, 10), st.floats(0.2, 0.9), st.sampled_from([0.5, 0.8, 1.0]),
       st.integers(1, 6), st.integers(0, 10 ** 6))
def test_clique_set_invariants(n, p, threshold, max_depth, seed):
    rnd = random.Random(seed)
    edges = oracles.random_graph(rnd, n, p)
    snap = Snapshot.from_edges(n, edges)
    labels = oracles.random_labels(rnd, n, rnd.randint(1, 3))
    part = Partition(labels)
    result = extract_all(snap, part, threshold, max_depth)
    check_invariants(snap, part.communities, result, threshold, max_depth)
    if threshold == 1.0:
        for clique in result:
            if any(set(clique) == set(c) for c in part.communities):
                continue
            oracle = oracles.maximal_cliques(n, edges, next(c for c in part.communities if clique[0] in c))
            assert any(set(clique) <= m for m in oracle)


def test_expansion_counter_smoke():
    # deeper searches can mark more nodes as searched and expand less overall,
    # so only the loose k * (d/2)^Md ceiling is checked
    rnd = random.Random(2)
    n = 30
    edges = oracles.random_graph(rnd, n, 0.4)
    snap = Snapshot.from_edges(n, edges)
    d = 2 * len(edges) / n
    for depth in (2, 4):
        stats = {}
        extract_cliques(snap, range(n), 0.6, depth, stats)
        assert 0 < stats["expansions"] <= n * max(d / 2, 2) ** depth


def test_dump_format():
    buf = io.StringIO()
    CliqueSet([[2, 0, 1], [5, 3, 4]]).dump(buf)
    assert buf.getvalue() == "0 1 2\n3 4 5\n"
