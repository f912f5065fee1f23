"""Seeding an initial population with cliques carried over from the previous snapshot."""

from __future__ import annotations

import numpy as np

from .cliques import CliqueSet
from .encoding import decode_many, encode_many, label_propagation_many
from .graph import Snapshot

REPAIR_SWEEPS = 5


def build_candidates(snapshot: Snapshot, clique_set: CliqueSet) -> dict[int, list[int]]:
    """Map each clique node to its current neighbours inside the same clique.

    Nodes whose candidate list is empty are kept (they are skipped during
    migration).
    """
    nbrs = snapshot.neighbor_sets()
    candidates: dict[int, list[int]] = {}
    for clique in clique_set:
        members = set(clique)
        for node in sorted(members):
            candidates[node] = sorted((nbrs[node] & members) - {node})
    return candidates


def _relabel_randomly(genotypes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Decode and give every community a distinct random tag in 0..n-1."""
    comp, count = decode_many(genotypes)
    pop, n = comp.shape
    rows = np.arange(pop)[:, None]
    # rank components by (row, id) so each row owns a block starting at its first rank
    _, rank = np.unique(rows * count + comp, return_inverse=True)
    rank = rank.reshape(pop, n)
    local = rank - rank.min(axis=1, keepdims=True)
    tags = np.argsort(rng.random((pop, n)), axis=1)
    return tags[rows, local]


def label_propagation_population(
    snapshot: Snapshot, population_size: int, rng: np.random.Generator, sweeps: int = REPAIR_SWEEPS
) -> np.ndarray:
    """Random unique labels, ``sweeps`` rounds of label propagation, encode."""
    labels = np.argsort(rng.random((population_size, snapshot.n)), axis=1)
    return encode_many(label_propagation_many(snapshot, labels, sweeps), snapshot, rng)


def migrate_population(
    snapshot: Snapshot,
    clique_set: CliqueSet,
    tp: float,
    population_size: int,
    rng: np.random.Generator,
    repair: bool = True,
    sweeps: int = REPAIR_SWEEPS,
    base: np.ndarray | None = None,
) -> np.ndarray:
    """Build ``population_size`` genotypes carrying transferred cliques.

    Each individual starts as a label-propagation initial solution (or the
    matching row of ``base`` when given).  Each
    clique node independently, with probability ``tp``, then points its gene
    at a random candidate inside its clique.  With ``repair`` the decoded
    communities get random distinct tags, ``sweeps`` more rounds of label
    propagation run on them and the result is re-encoded.

    Individuals that receive no clique gene are returned as is, so an empty
    clique set or ``tp = 0`` gives plain label-propagation initialisation.
    """
    if not 0.0 <= tp <= 1.0:
        raise ValueError("tp must lie in [0, 1]")
    if population_size < 1:
        raise ValueError("population_size must be >= 1")
    if base is None:
        pop = label_propagation_population(snapshot, population_size, rng, sweeps)
    else:
        pop = np.array(base, dtype=np.int64, copy=True)
        if pop.shape != (population_size, snapshot.n):
            raise ValueError(f"base population has shape {pop.shape}, expected {(population_size, snapshot.n)}")
    candidates = build_candidates(snapshot, clique_set)
    keys = np.array([u for u in candidates if candidates[u]], dtype=np.int64)
    if len(keys) == 0:
        return pop
    lengths = np.array([len(candidates[u]) for u in keys])
    offsets = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    flat = np.concatenate([candidates[u] for u in keys])
    hit = rng.random((population_size, len(keys))) < tp
    pick = np.floor(rng.random((population_size, len(keys))) * lengths).astype(np.int64)
    chosen = flat[offsets + pick]
    rows, cols = np.nonzero(hit)
    pop[rows, keys[cols]] = chosen[rows, cols]
    touched = np.flatnonzero(hit.any(axis=1))
    if not repair or len(touched) == 0:
        return pop
    # only individuals that received clique genes need repairing
    labels = label_propagation_many(snapshot, _relabel_randomly(pop[touched], rng), sweeps)
    pop[touched] = encode_many(labels, snapshot, rng)
    return pop
