"""NSGA-II specialised to locus genotypes.

Objectives are always minimised.  Populations are held as ``(P, n)`` gene
arrays with a matching ``(P, m)`` objective array; :class:`Individual` is
only materialised for results.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Callable, Hashable, Sequence, TextIO

import numpy as np

from .graph import Snapshot

ObjectiveFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GAParams:
    population_size: int = 200
    generations: int = 100
    crossover_probability: float = 0.8
    mutation_probability: float = 0.2
    cid_threshold: float = 0.8
    max_depth: int = 5
    transfer_probability: float = 0.5
    seed: int | None = None
    density_estimator: str = "standard"
    snapshot_cost: str = "modularity"
    pareto_selector: str = "community_score"

    def __post_init__(self):
        for name in ("crossover_probability", "mutation_probability", "cid_threshold", "transfer_probability"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.density_estimator not in ("standard", "shift-based"):
            raise ValueError(f"unknown density_estimator {self.density_estimator!r}")
        for name in ("snapshot_cost", "pareto_selector"):
            if getattr(self, name) not in ("modularity", "community_score"):
                raise ValueError(f"unknown {name} {getattr(self, name)!r}")

    def replace(self, **changes) -> "GAParams":
        return replace(self, **changes)


@dataclass
class Individual:
    genotype: np.ndarray
    objectives: np.ndarray
    rank: int = 1
    crowding: float = 0.0


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("objective vectors differ in length")
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_sort(objectives) -> np.ndarray:
    """Pareto rank (1 = nondominated) of every row of ``objectives``."""
    f = np.asarray(objectives, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    size = len(f)
    le = np.all(f[:, None, :] <= f[None, :, :], axis=2)
    lt = np.any(f[:, None, :] < f[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    dominated_by = dom.sum(axis=0)
    rank = np.zeros(size, dtype=np.int64)
    remaining = np.ones(size, dtype=bool)
    current = 1
    while remaining.any():
        front = remaining & (dominated_by == 0)
        rank[front] = current
        remaining &= ~front
        dominated_by = dominated_by - dom[front].sum(axis=0)
        current += 1
    return rank


def crowding_distance(front, shift_based: bool = False) -> np.ndarray:
    """Crowding distance of each member of one front.

    Per objective the members are sorted, boundary members get ``inf`` and
    interior members add ``(next - prev) / range``.  With ``shift_based`` the
    two neighbours are first shifted to ``max(neighbour, self)``, so only the
    worse-side gap counts.
    """
    f = np.asarray(front, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    size, m = f.shape
    dist = np.zeros(size)
    if size <= 2:
        dist[:] = np.inf
        return dist
    for j in range(m):
        order = np.argsort(f[:, j], kind="stable")
        vals = f[order, j]
        span = vals[-1] - vals[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span == 0:
            continue
        prev, nxt, own = vals[:-2], vals[2:], vals[1:-1]
        if shift_based:
            prev = np.maximum(prev, own)
            nxt = np.maximum(nxt, own)
        dist[order[1:-1]] += (nxt - prev) / span
    return dist


def selection_weights(ranks) -> np.ndarray:
    return 1.0 / np.asarray(ranks, dtype=float)


def select_pair(ranks, rng: np.random.Generator) -> tuple[int, int]:
    """Two independent draws (with replacement) weighted by inverse rank."""
    w = selection_weights(ranks)
    cdf = np.cumsum(w)
    picks = np.searchsorted(cdf, rng.random(2) * cdf[-1], side="right")
    picks = np.minimum(picks, len(w) - 1)
    return int(picks[0]), int(picks[1])


def crossover_with_mask(parent1, parent2, mask) -> tuple[np.ndarray, np.ndarray]:
    p1, p2 = np.asarray(parent1), np.asarray(parent2)
    mask = np.asarray(mask, dtype=bool)
    if p1.shape != p2.shape or p1.shape != mask.shape:
        raise ValueError("parents and mask must have equal length")
    return np.where(mask, p1, p2), np.where(mask, p2, p1)


def uniform_crossover(parent1, parent2, cp: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Mask bit 1 (probability ``cp``): child1 keeps parent1's gene; 0: swap."""
    p1 = np.asarray(parent1)
    if p1.shape != np.shape(parent2):
        raise ValueError("parents differ in length")
    mask = rng.random(p1.shape) < cp
    return crossover_with_mask(p1, parent2, mask)


def mutate(genotype, mp: float, snapshot: Snapshot, rng: np.random.Generator) -> np.ndarray:
    """Each gene, with probability ``mp``, moves to a random neighbour."""
    genes = np.array(genotype, dtype=np.int64, copy=True)
    deg = snapshot.degrees
    hit = (rng.random(len(genes)) < mp) & (deg > 0)
    if hit.any():
        pick = np.floor(rng.random(int(hit.sum())) * deg[hit]).astype(np.int64)
        genes[hit] = snapshot.indices[snapshot.indptr[:-1][hit] + pick]
    return genes


def _truncate(objectives: np.ndarray, keep: int, shift_based: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rank-then-crowding survivor selection; returns (indices, ranks, crowding)."""
    ranks = nondominated_sort(objectives)
    crowd = np.zeros(len(objectives))
    for r in np.unique(ranks):
        members = np.flatnonzero(ranks == r)
        crowd[members] = crowding_distance(objectives[members], shift_based)
    order = np.lexsort((-crowd, ranks))[:keep]
    return order, ranks[order], crowd[order]


@dataclass
class EvolutionResult:
    front: list[Individual]
    population: np.ndarray
    objectives: np.ndarray
    ranks: np.ndarray
    history: list[dict] = field(default_factory=list)


def evolve(
    snapshot: Snapshot,
    initial_population: np.ndarray,
    objective_fn: ObjectiveFn,
    params: GAParams,
    rng: np.random.Generator,
    key_fn: Callable[[np.ndarray], Hashable] | None = None,
    trace: Callable[[dict], None] | None = None,
) -> EvolutionResult:
    """Elitist NSGA-II loop.

    Each generation breeds ``population_size`` offspring by repeated
    inverse-rank pair selection, uniform crossover and mutation of both
    children, pools them with the parents and keeps the best
    ``population_size`` by rank then crowding.  ``objective_fn`` maps a
    ``(P, n)`` gene array to a ``(P, m)`` objective array.

    The returned front holds the final rank-1 individuals, deduplicated by
    ``key_fn`` (default: the raw genotype).
    """
    pop = np.array(initial_population, dtype=np.int64, copy=True)
    size = params.population_size
    if len(pop) != size:
        raise ValueError(f"initial population has {len(pop)} individuals, expected {size}")
    shift = params.density_estimator == "shift-based"
    obj = np.asarray(objective_fn(pop), dtype=float)
    if obj.ndim == 1:
        obj = obj[:, None]
    ranks = nondominated_sort(obj)
    history = []

    def record(gen):
        row = {"generation": gen, "front_size": int(np.sum(ranks == 1))}
        for j in range(obj.shape[1]):
            row[f"best_{j}"] = float(obj[:, j].min())
        history.append(row)
        if trace is not None:
            trace(row)

    record(0)
    for gen in range(1, params.generations + 1):
        children = np.empty_like(pop)
        for slot in range(0, size, 2):
            i, j = select_pair(ranks, rng)
            c1, c2 = uniform_crossover(pop[i], pop[j], params.crossover_probability, rng)
            children[slot] = mutate(c1, params.mutation_probability, snapshot, rng)
            if slot + 1 < size:
                children[slot + 1] = mutate(c2, params.mutation_probability, snapshot, rng)
        child_obj = np.asarray(objective_fn(children), dtype=float).reshape(size, -1)
        pool = np.concatenate([pop, children])
        pool_obj = np.concatenate([obj, child_obj])
        keep, ranks, _ = _truncate(pool_obj, size, shift)
        pop, obj = pool[keep], pool_obj[keep]
        # ranks inside the survivors are unchanged by truncation
        record(gen)

    final_ranks = nondominated_sort(obj)
    front_idx = np.flatnonzero(final_ranks == 1)
    crowd = crowding_distance(obj[front_idx], shift)
    seen = set()
    front = []
    for pos, idx in enumerate(front_idx):
        key = key_fn(pop[idx]) if key_fn is not None else pop[idx].tobytes()
        if key in seen:
            continue
        seen.add(key)
        front.append(Individual(pop[idx].copy(), obj[idx].copy(), 1, float(crowd[pos])))
    return EvolutionResult(front, pop, obj, final_ranks, history)


def write_trace(history: list[dict], stream: TextIO) -> None:
    if not history:
        return
    writer = csv.DictWriter(stream, fieldnames=list(history[0]))
    writer.writeheader()
    writer.writerows(history)
