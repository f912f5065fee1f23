import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from tmoga.encoding import decode, is_valid, random_genotype
from tmoga.graph import Snapshot
from tmoga.moea import (
    GAParams,
    crossover_with_mask,
    crowding_distance,
    dominates,
    evolve,
    mutate,
    nondominated_sort,
    select_pair,
    selection_weights,
    uniform_crossover,
)
from tmoga.objectives import ObjectiveFunction
import oracles
from oracles import BARBELL

EXAMPLE_RANKS = (1, 3, 2, 1, 2, 4, 5)
EXAMPLE_WEIGHTS = (1, 1 / 3, 1 / 2, 1, 1 / 2, 1 / 4, 1 / 5)
P1, P2 = (3, 5, 1, 1, 3, 4, 6), (1, 3, 2, 6, 2, 4, 5)
MASK = (0, 1, 1, 1, 0, 0, 1)
C1, C2 = (1, 5, 1, 1, 2, 4, 6), (3, 3, 2, 6, 3, 4, 5)


def test_dominates_examples():
    assert dominates((1, 1), (2, 2))
    assert not dominates((1, 2), (2, 1))
    assert not dominates((1, 1), (1, 1))
    with pytest.raises(ValueError):
        dominates((1,), (1, 2))


def test_sort_examples():
    assert nondominated_sort([(1, 1), (1, 2), (2, 1), (2, 2)]).tolist() == [1, 2, 2, 3]
    assert nondominated_sort([(3, 3)] * 4).tolist() == [1] * 4
    assert nondominated_sort([(0.5, 2)]).tolist() == [1]


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=50))
def test_sort_matches_peeling_oracle(objs):
    assert nondominated_sort(objs).tolist() == oracles.peel_ranks(objs)


def test_crowding_examples():
    assert np.isinf(crowding_distance([(0, 1), (1, 0)])).all()
    d = crowding_distance([(0, 2), (1, 1), (2, 0)])
    assert d[1] == pytest.approx(2.0)
    assert np.isinf(d[[0, 2]]).all()
    # the middle copy of three has identical neighbours on both sides
    d = crowding_distance([(0, 4), (2, 2), (2, 2), (2, 2), (4, 0)])
    assert d[2] == 0.0
    assert crowding_distance([(1, 1)] * 4)[1:3].tolist() == [0.0, 0.0]


def test_shift_based_crowding_only_counts_worse_side():
    front = [(0, 4), (1, 2), (3, 1), (4, 0)]
    std = crowding_distance(front)
    shifted = crowding_distance(front, shift_based=True)
    assert np.all(shifted[1:3] <= std[1:3] + 1e-12)


def test_selection_weights_example():
    assert np.allclose(selection_weights(EXAMPLE_RANKS), EXAMPLE_WEIGHTS, atol=1e-12)


def test_select_pair_edge_cases():
    rng = np.random.default_rng(0)
    assert select_pair([1], rng) == (0, 0)
    counts = np.zeros(4)
    for _ in range(4000):
        counts[list(select_pair([1, 1, 1, 1], rng))] += 1
    assert stats.chisquare(counts).pvalue > 0.001


def test_select_pair_frequencies():
    rng = np.random.default_rng(7)
    counts = np.zeros(len(EXAMPLE_RANKS))
    for _ in range(50_000):
        i, j = select_pair(EXAMPLE_RANKS, rng)
        counts[i] += 1
        counts[j] += 1
    w = np.array(EXAMPLE_WEIGHTS)
    assert stats.chisquare(counts, counts.sum() * w / w.sum()).pvalue > 0.001


def test_crossover_example():
    c1, c2 = crossover_with_mask(P1, P2, MASK)
    assert tuple(c1) == C1 and tuple(c2) == C2
    b1, b2 = crossover_with_mask(c1, c2, MASK)
    assert tuple(b1) == P1 and tuple(b2) == P2
    same = crossover_with_mask(P1, P2, [1] * 7)
    assert tuple(same[0]) == P1 and tuple(same[1]) == P2
    twins = crossover_with_mask(P1, P1, MASK)
    assert tuple(twins[0]) == P1 == tuple(twins[1])
    with pytest.raises(ValueError):
        crossover_with_mask(P1, P2[:3], MASK[:3])


@given(st.integers(2, 20), st.floats(0, 1), st.integers(0, 2 ** 32 - 1))
def test_uniform_crossover_keeps_genes_in_place(n, cp, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.integers(0, n, n), rng.integers(0, n, n)
    c1, c2 = uniform_crossover(a, b, cp, rng)
    assert np.all((c1 == a) & (c2 == b) | (c1 == b) & (c2 == a))


def test_mutate_examples():
    rng = np.random.default_rng(1)
    snap = Snapshot.from_edges(5, [(0, 1), (1, 2), (2, 3)])
    genes = random_genotype(snap, rng)
    assert mutate(genes, 0.0, snap, rng).tolist() == genes.tolist()
    for _ in range(20):
        out = mutate(genes, 1.0, snap, rng)
        assert all(out[u] in snap.neighbors(u) for u in range(4))
        assert out[4] == 4


@given(st.integers(2, 15), st.floats(0.1, 0.7), st.floats(0, 1), st.integers(0, 2 ** 32 - 1))
def test_operators_preserve_validity(n, p, mp, seed):
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    snap = Snapshot.from_edges(n, np.column_stack([iu[keep], iv[keep]]))
    a, b = random_genotype(snap, rng), random_genotype(snap, rng)
    for child in uniform_crossover(a, b, 0.5, rng):
        assert is_valid(snap, mutate(child, mp, snap, rng))


def test_params_validation():
    with pytest.raises(ValueError):
        GAParams(mutation_probability=1.5)
    with pytest.raises(ValueError):
        GAParams(density_estimator="other")
    p = GAParams()
    assert (p.population_size, p.generations, p.crossover_probability, p.mutation_probability) == (200, 100, 0.8, 0.2)
    assert (p.transfer_probability, p.max_depth, p.cid_threshold) == (0.5, 5, 0.8)


def test_zero_generations_returns_initial_rank_one():
    snap = Snapshot.from_edges(6, BARBELL)
    rng = np.random.default_rng(3)
    pop = np.array([random_genotype(snap, rng) for _ in range(10)])
    fn = ObjectiveFunction(snap)
    res = evolve(snap, pop, fn, GAParams(population_size=10, generations=0), rng)
    best = fn(pop)[:, 0].min()
    assert all(ind.objectives[0] == best for ind in res.front)
    keys = {ind.genotype.tobytes() for ind in res.front}
    assert keys <= {g.tobytes() for g in pop}


def test_barbell_single_objective():
    snap = Snapshot.from_edges(6, BARBELL)
    params = GAParams(population_size=50, generations=50, seed=0)
    rng = np.random.default_rng(0)
    pop = np.array([random_genotype(snap, rng) for _ in range(50)])
    res = evolve(snap, pop, ObjectiveFunction(snap), params, rng, key_fn=lambda g: decode(g).key())
    assert len(res.front) == 1
    assert sorted(map(sorted, decode(res.front[0].genotype).communities)) == [[0, 1, 2], [3, 4, 5]]
    assert -res.front[0].objectives[0] == pytest.approx(5 / 14, abs=1e-12)


def test_elitism_and_mutual_nondominance():
    rnd = random.Random(4)
    snap = Snapshot.from_edges(20, oracles.random_graph(rnd, 20, 0.25))
    rng = np.random.default_rng(4)
    prev = decode(random_genotype(snap, rng), snap)
    pop = np.array([random_genotype(snap, rng) for _ in range(20)])
    seen = []
    res = evolve(snap, pop, ObjectiveFunction(snap, previous=prev), GAParams(population_size=20, generations=15),
                 rng, trace=seen.append)
    assert len(seen) == 16
    for j in (0, 1):
        best = [row[f"best_{j}"] for row in seen]
        assert all(b <= a + 1e-15 for a, b in zip(best, best[1:]))
    objs = [ind.objectives for ind in res.front]
    assert not any(dominates(a, b) for a in objs for b in objs)
    assert all(is_valid(snap, g) for g in res.population)


def test_wrong_population_size_rejected():
    snap = Snapshot.from_edges(3, [(0, 1)])
    with pytest.raises(ValueError):
        evolve(snap, np.zeros((2, 3), dtype=int), ObjectiveFunction(snap), GAParams(population_size=4), np.random.default_rng())
