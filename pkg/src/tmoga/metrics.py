"""Partition quality and similarity measures.

All logarithms are natural.  Functions accept a :class:`Partition` or a raw
label vector wherever a partition is expected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph import Partition, Snapshot, internal_edge_count


class UndefinedMetricError(ValueError):
    pass


def _labels(partition, n: int | None = None) -> np.ndarray:
    labels = partition.labels if isinstance(partition, Partition) else Partition(partition).labels
    if n is not None and len(labels) != n:
        raise ValueError(f"partition covers {len(labels)} nodes, expected {n}")
    return labels


def modularity(snapshot: Snapshot, partition) -> float:
    """Newman modularity ``sum_i [l_i/|E| - (d_i / 2|E|)^2]``."""
    labels = _labels(partition, snapshot.n)
    m = snapshot.edge_count
    if m == 0:
        raise UndefinedMetricError("modularity is undefined on a graph without edges")
    e = snapshot.edges
    k = int(labels.max()) + 1
    inside = labels[e[:, 0]] == labels[e[:, 1]]
    l = np.bincount(labels[e[inside, 0]], minlength=k)
    d = np.bincount(labels, weights=snapshot.degrees, minlength=k)
    return float(np.sum(l / m - (d / (2.0 * m)) ** 2))


def community_score(snapshot: Snapshot, partition) -> float:
    """Community Score of order 2.

    For community ``C`` with member internal degrees ``k_m`` the term is
    ``mean_m((k_m/|C|)^2) * sum_{m,n in C} A_mn`` where the double sum runs
    over ordered pairs, i.e. equals twice the internal edge count.
    """
    labels = _labels(partition, snapshot.n)
    k = int(labels.max()) + 1
    e = snapshot.edges
    inside = labels[e[:, 0]] == labels[e[:, 1]]
    kin = np.bincount(e[inside].ravel(), minlength=snapshot.n).astype(float)
    size = np.bincount(labels, minlength=k).astype(float)
    mu = kin / size[labels]
    mean_mu2 = np.bincount(labels, weights=mu**2, minlength=k) / size
    pair_sum = 2.0 * np.bincount(labels[e[inside, 0]], minlength=k)
    return float(np.sum(mean_mu2 * pair_sum))


def cid(snapshot: Snapshot, nodes: Iterable[int]) -> float:
    """Community internal density ``2 L(S) / (|S| (|S| - 1))``."""
    nodes = list(nodes)
    s = len(set(nodes))
    if s < 2:
        raise UndefinedMetricError("CID needs at least two nodes")
    return 2.0 * internal_edge_count(snapshot, set(nodes)) / (s * (s - 1))


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def confusion(partition_a, partition_b) -> ConfusionMatrix:
    a = _labels(partition_a)
    b = _labels(partition_b, len(a))
    ka, kb = int(a.max()) + 1, int(b.max()) + 1
    counts = np.bincount(a * kb + b, minlength=ka * kb).reshape(ka, kb)
    return ConfusionMatrix(counts)


def nmi(partition_a, partition_b) -> float:
    """Normalised mutual information from the confusion matrix.

    Returns 1 when both partitions are the single all-node community.
    """
    cm = confusion(partition_a, partition_b)
    c = cm.counts.astype(float)
    n = float(cm.n)
    ra, cb = c.sum(axis=1), c.sum(axis=0)
    denom = np.sum(ra * np.log(ra / n)) + np.sum(cb * np.log(cb / n))
    if denom == 0.0:
        return 1.0
    i, j = np.nonzero(c)
    num = -2.0 * np.sum(c[i, j] * np.log(c[i, j] * n / (ra[i] * cb[j])))
    return float(min(1.0, max(0.0, num / denom)))
