"""End-to-end dynamic detection: per-snapshot GA runs chained by feature transfer."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import metrics
from .cliques import extract_all
from .encoding import decode, random_genotype
from .graph import DynamicNetwork, Partition, Snapshot
from .moea import GAParams, Individual, evolve
from .objectives import DecodedBatch, ObjectiveFunction
from .transfer import label_propagation_population, migrate_population

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
STRATEGIES = ("random", "label-prop", "naive-transfer", "feature-transfer")


@dataclass
class FrontEntry:
    objectives: list[float]
    partition: Partition
    modularity: float
    community_score: float


@dataclass
class SnapshotResult:
    t: int
    partition: Partition
    modularity: float
    community_score: float
    communities: int
    nmi_previous: float | None
    nmi_truth: float | None
    seconds: float
    transfer_seconds: float
    cliques: int
    front: list[FrontEntry] = field(default_factory=list)
    history: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "t": self.t,
            "modularity": self.modularity,
            "community_score": self.community_score,
            "communities": self.communities,
            "nmi_previous": self.nmi_previous,
            "nmi_truth": self.nmi_truth,
            "seconds": self.seconds,
            "transfer_seconds": self.transfer_seconds,
            "cliques": self.cliques,
            "front_size": len(self.front),
            "front": [e.objectives for e in self.front],
        }


@dataclass
class RunReport:
    params: GAParams
    snapshots: list[SnapshotResult]
    total_seconds: float = 0.0

    @property
    def partitions(self) -> list[Partition]:
        return [s.partition for s in self.snapshots]

    @property
    def transfer_seconds(self) -> float:
        return sum(s.transfer_seconds for s in self.snapshots)

    def column(self, name: str) -> list:
        return [getattr(s, name) for s in self.snapshots]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "params": asdict(self.params),
            "seed": self.params.seed,
            "total_seconds": self.total_seconds,
            "transfer_seconds": self.transfer_seconds,
            "snapshots": [s.summary() for s in self.snapshots],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def select_final(front: Sequence[Partition], snapshot: Snapshot, criterion: str = "community_score") -> int:
    """Index of the front member maximising ``criterion``.

    Ties go to higher modularity, then fewer communities, then the
    lexicographically smallest canonical label vector.
    """
    if not front:
        raise ValueError("empty Pareto front")

    def key(i):
        p = front[i]
        q = metrics.modularity(snapshot, p)
        score = q if criterion == "modularity" else metrics.community_score(snapshot, p)
        return (-score, -q, p.k, tuple(p.labels.tolist()))

    return min(range(len(front)), key=key)


def _decode_key(genes: np.ndarray) -> bytes:
    return decode(genes).key()


def _front_entries(snapshot: Snapshot, front: list[Individual]) -> list[FrontEntry]:
    genes = np.array([ind.genotype for ind in front])
    batch = DecodedBatch(snapshot, genes)
    q, cs = batch.modularity(), batch.community_score()
    parts = batch.partitions()
    return [FrontEntry(ind.objectives.tolist(), parts[i], float(q[i]), float(cs[i])) for i, ind in enumerate(front)]


def run_tmoga(network: DynamicNetwork, params: GAParams, truth: Sequence[Partition] | None = None,
              workers: int = 1, keep_history: bool = False) -> RunReport:
    """Detect communities snapshot by snapshot.

    At ``t = 1`` the population comes from label propagation and only the
    snapshot quality is optimised.  From ``t = 2`` cliques found in the
    previous chosen partition (on the previous snapshot) seed the population
    and the GA also maximises NMI to that partition.  The final partition of
    each step is picked from the Pareto front by ``params.pareto_selector``.
    """
    if truth is not None and len(truth) != network.T:
        raise ValueError(f"{len(truth)} truth partitions for {network.T} snapshots")
    rng = np.random.default_rng(params.seed)
    results: list[SnapshotResult] = []
    start_all = time.perf_counter()
    previous: Partition | None = None
    for t, snapshot in enumerate(network, start=1):
        start = time.perf_counter()
        if snapshot.edge_count == 0:
            raise metrics.UndefinedMetricError(f"snapshot {t} has no edges")
        pop = label_propagation_population(snapshot, params.population_size, rng)
        transfer_seconds, n_cliques = 0.0, 0
        if previous is not None:
            # timed separately: clique extraction plus migration into the fresh population
            tick = time.perf_counter()
            cliques = extract_all(network[t - 2], previous, params.cid_threshold, params.max_depth, t - 1)
            pop = migrate_population(snapshot, cliques, params.transfer_probability, params.population_size,
                                     rng, base=pop)
            transfer_seconds = time.perf_counter() - tick
            n_cliques = len(cliques)
        objective = ObjectiveFunction(snapshot, params.snapshot_cost, previous, workers)
        result = evolve(snapshot, pop, objective, params, rng, key_fn=_decode_key)
        front = _front_entries(snapshot, result.front)
        chosen = front[select_final([e.partition for e in front], snapshot, params.pareto_selector)]
        partition = chosen.partition
        elapsed = time.perf_counter() - start
        results.append(SnapshotResult(
            t=t,
            partition=partition,
            modularity=metrics.modularity(snapshot, partition),
            community_score=metrics.community_score(snapshot, partition),
            communities=partition.k,
            nmi_previous=None if previous is None else metrics.nmi(partition, previous),
            nmi_truth=None if truth is None else metrics.nmi(partition, truth[t - 1]),
            seconds=elapsed,
            transfer_seconds=transfer_seconds,
            cliques=n_cliques,
            front=front,
            history=result.history if keep_history else [],
        ))
        log.info("t=%d Q=%.4f k=%d nmi_truth=%s %.2fs (transfer %.3fs)", t, results[-1].modularity,
                 partition.k, results[-1].nmi_truth, elapsed, transfer_seconds)
        previous = partition
    return RunReport(params, results, time.perf_counter() - start_all)


def label_propagation_baseline(network: DynamicNetwork, params: GAParams,
                               truth: Sequence[Partition] | None = None) -> list[dict]:
    """Best-modularity member of a label-propagation population, per snapshot (no GA, no transfer)."""
    rng = np.random.default_rng(params.seed)
    rows = []
    for t, snapshot in enumerate(network, start=1):
        pop = label_propagation_population(snapshot, params.population_size, rng)
        batch = DecodedBatch(snapshot, pop)
        best = int(np.argmax(batch.modularity()))
        part = Partition(batch.comp[best])
        rows.append({
            "t": t,
            "partition": part,
            "modularity": metrics.modularity(snapshot, part),
            "nmi_truth": None if truth is None else metrics.nmi(part, truth[t - 1]),
        })
    return rows


def _initial_population(strategy: str, network: DynamicNetwork, t: int, truth: Sequence[Partition],
                        size: int, params: GAParams, rng: np.random.Generator) -> np.ndarray:
    snapshot = network[t - 1]
    if strategy == "random":
        return np.array([random_genotype(snapshot, rng) for _ in range(size)])
    if strategy == "label-prop":
        return label_propagation_population(snapshot, size, rng)
    if strategy in ("naive-transfer", "feature-transfer"):
        if t == 1:
            # nothing to transfer yet: the run itself starts from label propagation
            return label_propagation_population(snapshot, size, rng)
        cliques = extract_all(network[t - 2], truth[t - 2], params.cid_threshold, params.max_depth, t - 1)
        return migrate_population(snapshot, cliques, params.transfer_probability, size, rng,
                                  repair=strategy == "feature-transfer")
    raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")


def compare_initializations(network: DynamicNetwork, truth: Sequence[Partition],
                            strategies: Sequence[str] = STRATEGIES, seed: int | None = None,
                            params: GAParams | None = None, solutions: int = 200, top: int = 20) -> list[dict]:
    """Mean NMI-to-truth of the best ``top`` of ``solutions`` initial solutions per strategy and snapshot.

    Transfer strategies extract cliques from the true partition of the
    previous snapshot.  At ``t = 1`` there is nothing to transfer and both
    transfer columns fall back to label-propagation initialisation.
    """
    if truth is None or len(truth) != network.T:
        raise ValueError("a truth partition is required for every snapshot")
    params = params or GAParams()
    rng = np.random.default_rng(seed)
    rows = []
    for t in range(1, network.T + 1):
        row = {"t": t}
        for strategy in strategies:
            pop = _initial_population(strategy, network, t, truth, solutions, params, rng)
            batch = DecodedBatch(network[t - 1], pop)
            scores = np.sort(batch.nmi(truth[t - 1]))[::-1]
            row[strategy] = float(np.mean(scores[:top]))
        rows.append(row)
    return rows
