"""Discrete information measures and numeric checks of the transfer analysis.

Distributions are plain numpy arrays (any number of axes) summing to one.
Logs are natural.  An :class:`IBInstance` is kept as a sparse table of
outcomes over the axes ``(x, cur, prev, z)``: a node ``x``, its community in
the current and in the previous partition, and the feature variable ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .graph import Partition

TOLERANCE = 1e-9
SUM_TOLERANCE = 1e-12
AXES = ("x", "cur", "prev", "z")


class InvalidDistributionError(ValueError):
    pass


class UnstableCliqueError(ValueError):
    """A clique is split by one of the two partitions."""


def check_distribution(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.size == 0:
        raise InvalidDistributionError("empty distribution")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InvalidDistributionError("probabilities must be finite and non-negative")
    total = float(p.sum())
    if abs(total - 1.0) > SUM_TOLERANCE * max(1, p.size):
        raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
    return p


def _h(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def entropy(p) -> float:
    """Shannon entropy of a distribution (flattened if multi-axis)."""
    return _h(check_distribution(p).ravel())


def mutual_information(joint) -> float:
    """I(A;B) of a 2-axis joint ``joint[a, b]``."""
    p = check_distribution(joint)
    if p.ndim != 2:
        raise InvalidDistributionError("mutual_information expects a 2-axis joint")
    pa, pb = p.sum(axis=1), p.sum(axis=0)
    nz = p > 0
    outer = np.outer(pa, pb)
    return max(0.0, float(np.sum(p[nz] * np.log(p[nz] / outer[nz]))))


def kl_divergence(p, q) -> float:
    """KL(p || q); ``inf`` when p puts mass where q has none."""
    p, q = check_distribution(p), check_distribution(q)
    if p.shape != q.shape:
        raise InvalidDistributionError("p and q differ in shape")
    nz = p > 0
    if np.any(q[nz] == 0):
        return float("inf")
    return max(0.0, float(np.sum(p[nz] * np.log(p[nz] / q[nz]))))


def nmi_prob(joint) -> float:
    """2 I(A;B) / (H(A) + H(B)); 1 when both marginals are point masses."""
    p = check_distribution(joint)
    if p.ndim != 2:
        raise InvalidDistributionError("nmi_prob expects a 2-axis joint")
    denom = _h(p.sum(axis=1)) + _h(p.sum(axis=0))
    if denom == 0.0:
        return 1.0
    return float(np.clip(2.0 * mutual_information(p) / denom, 0.0, 1.0))


def ib_objective(joint_x_xtilde, beta: float) -> float:
    """I(X;X~) - beta * H(X~) for a joint ``p[x, x~]``."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    p = check_distribution(joint_x_xtilde)
    return mutual_information(p) - beta * _h(p.sum(axis=0))


def partition_joint(a, b) -> np.ndarray:
    """Joint of the community labels of a uniformly drawn node under two partitions."""
    a = a.labels if isinstance(a, Partition) else Partition(a).labels
    b = b.labels if isinstance(b, Partition) else Partition(b).labels
    if len(a) != len(b):
        raise ValueError("partitions cover different node counts")
    joint = np.zeros((a.max() + 1, b.max() + 1))
    np.add.at(joint, (a, b), 1.0 / len(a))
    return joint


def assignment_joint(partition) -> np.ndarray:
    """``p[x, x~]`` for uniform X and the deterministic assignment given by ``partition``."""
    labels = partition.labels if isinstance(partition, Partition) else Partition(partition).labels
    n = len(labels)
    joint = np.zeros((n, labels.max() + 1))
    joint[np.arange(n), labels] = 1.0 / n
    return joint


def set_partitions(n: int) -> Iterator[np.ndarray]:
    """Every partition of ``n`` elements as a restricted-growth label vector."""
    if n < 1:
        return
    labels = np.zeros(n, dtype=np.int64)
    high = np.zeros(n, dtype=np.int64)  # high[i] = max(labels[:i])

    def rec(i):
        if i == n:
            yield labels.copy()
            return
        for v in range(high[i - 1] + 2 if i else 1):
            labels[i] = v
            if i + 1 < n:
                high[i] = max(high[i - 1], v) if i else v
            yield from rec(i + 1)

    yield from rec(0)


def theorem1_exhaustive(n: int) -> bool:
    """H(X~) <= H(X) for every deterministic partition of a uniform X over ``n`` nodes."""
    hx = np.log(n)
    return all(entropy(assignment_joint(p).sum(axis=0)) <= hx + TOLERANCE for p in set_partitions(n))


@dataclass(frozen=True)
class IBInstance:
    """Sparse joint over ``(x, cur, prev, z)``: ``outcomes[i]`` has probability ``prob[i]``."""

    outcomes: np.ndarray
    prob: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        outcomes = np.asarray(self.outcomes, dtype=np.int64)
        if outcomes.ndim != 2 or outcomes.shape[1] != len(AXES):
            raise ValueError(f"outcomes must have shape (m, {len(AXES)})")
        if np.any(outcomes < 0):
            raise ValueError("outcome indices must be non-negative")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "prob", check_distribution(self.prob))
        if len(self.prob) != len(outcomes):
            raise ValueError("one probability per outcome required")

    @property
    def n(self) -> int:
        return int(self.outcomes[:, 0].max()) + 1

    def _cols(self, axes: Sequence[str]) -> np.ndarray:
        return self.outcomes[:, [AXES.index(a) for a in axes]]

    def _grouped(self, axes: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        """(distinct outcome rows over ``axes``, their probability, per original row index)."""
        _, inv = np.unique(self._cols(axes), axis=0, return_inverse=True)
        inv = inv.ravel()
        return np.bincount(inv, weights=self.prob), inv

    def entropy(self, *axes: str) -> float:
        return _h(self._grouped(axes)[0])

    def mutual_information(self, a: Sequence[str], b: Sequence[str]) -> float:
        i = self.entropy(*a) + self.entropy(*b) - self.entropy(*a, *b)
        return max(0.0, i)

    def nmi(self, a: Sequence[str], b: Sequence[str]) -> float:
        denom = self.entropy(*a) + self.entropy(*b)
        if denom == 0.0:
            return 1.0
        return 2.0 * self.mutual_information(a, b) / denom

    def marginal(self, *axes: str) -> np.ndarray:
        """Dense marginal tensor over ``axes``."""
        cols = self._cols(axes)
        out = np.zeros(tuple(cols.max(axis=0) + 1))
        np.add.at(out, tuple(cols.T), self.prob)
        return out

    def transfer_kl(self) -> float:
        """KL( p(x,z,x~) || p(x,z) p(x~|x) ), with ``x~`` the current community."""
        p_xzc, r_xzc = self._grouped(("x", "z", "cur"))
        p_xz, r_xz = self._grouped(("x", "z"))
        p_xc, r_xc = self._grouped(("x", "cur"))
        p_x, r_x = self._grouped(("x",))
        # one representative row per (x, z, x~) outcome
        _, first = np.unique(r_xzc, return_index=True)
        p = p_xzc[r_xzc[first]]
        q = p_xz[r_xz[first]] * p_xc[r_xc[first]] / p_x[r_x[first]]
        nz = p > 0
        return float(np.sum(p[nz] * np.log(p[nz] / q[nz])))

    def ib_objective(self) -> float:
        return self.mutual_information(("x",), ("cur",)) - self.beta * self.entropy("cur")


def build_ib_instance(partition_prev, partition_cur, clique_set: Iterable[Iterable[int]],
                      beta: float = 1.0) -> IBInstance:
    """Uniform node variable with deterministic community assignments and a feature variable.

    ``z`` takes the current community label on every (current, previous)
    community intersection that holds a clique node and a shared "no
    feature" value elsewhere, so on clique nodes it agrees with the current
    assignment.  Each clique must lie inside one community of both
    partitions.
    """
    prev = partition_prev if isinstance(partition_prev, Partition) else Partition(partition_prev)
    cur = partition_cur if isinstance(partition_cur, Partition) else Partition(partition_cur)
    if prev.n != cur.n:
        raise ValueError("partitions cover different node counts")
    n = cur.n
    a, b = cur.labels, prev.labels
    marked = np.zeros((cur.k, prev.k), dtype=bool)
    for clique in clique_set:
        nodes = np.asarray(sorted(set(clique)), dtype=np.int64)
        if len(nodes) == 0:
            continue
        if nodes.min() < 0 or nodes.max() >= n:
            raise ValueError("clique node out of range")
        if len(np.unique(a[nodes])) > 1 or len(np.unique(b[nodes])) > 1:
            raise UnstableCliqueError(f"clique {nodes.tolist()} is split across communities")
        marked[a[nodes[0]], b[nodes[0]]] = True
    none = cur.k  # label for "no feature"
    z = np.where(marked[a, b], a, none)
    outcomes = np.column_stack([np.arange(n), a, b, z])
    return IBInstance(outcomes, np.full(n, 1.0 / n), beta)


@dataclass
class TheoremReport:
    thm1: bool
    thm3_gap: float
    thm3_kl: float
    thm4_gap: float

    def passed(self, tol: float = TOLERANCE) -> bool:
        return (
            self.thm1
            and self.thm3_gap >= -tol
            and abs(self.thm3_gap + self.thm3_kl) <= tol
            and self.thm4_gap >= -tol
        )


def verify_theorems(instance: IBInstance) -> TheoremReport:
    """Entropy reduction, the compression gap and the temporal-NMI gap on one instance.

    ``thm3_gap = I(X;X~) - I(X,Z;X~)``, which the chain rule pins to minus
    ``thm3_kl``; ``thm4_gap = NMI((X~cur, Z); X~prev) - NMI(X~cur; X~prev)``.
    """
    hx = instance.entropy("x")
    thm1 = instance.entropy("cur") <= hx + TOLERANCE and instance.entropy("prev") <= hx + TOLERANCE
    gap3 = instance.mutual_information(("x",), ("cur",)) - instance.mutual_information(("x", "z"), ("cur",))
    gap4 = instance.nmi(("cur", "z"), ("prev",)) - instance.nmi(("cur",), ("prev",))
    return TheoremReport(bool(thm1), float(gap3), instance.transfer_kl(), float(gap4))


def random_instance(rng: np.random.Generator, max_nodes: int = 12, beta: float = 1.0) -> IBInstance:
    """Random previous/current partition pair with random stable cliques."""
    n = int(rng.integers(2, max_nodes + 1))
    prev = rng.integers(0, int(rng.integers(1, n + 1)), n)
    cur = prev.copy()
    moved = rng.random(n) < rng.random()
    cur[moved] = rng.integers(0, int(rng.integers(1, n + 1)), int(moved.sum()))
    cells: dict[tuple[int, int], list[int]] = {}
    for u in range(n):
        cells.setdefault((int(cur[u]), int(prev[u])), []).append(u)
    cliques = []
    for members in cells.values():
        if rng.random() < 0.5:
            size = int(rng.integers(1, len(members) + 1))
            cliques.append(rng.choice(members, size, replace=False).tolist())
    return build_ib_instance(prev, cur, cliques, beta)


def corrupt_instance(instance: IBInstance, rng: np.random.Generator) -> IBInstance:
    """Negative control: a noisy current assignment that ``z`` copies.

    Z then carries information about X~ beyond X, so the compression gap
    goes negative.
    """
    base = instance.outcomes
    k = int(base[:, 1].max()) + 1
    if k < 2:
        k = 2
    rows, prob = [], []
    for (x, a, b, _), p in zip(base, instance.prob):
        other = int((a + 1 + rng.integers(0, k - 1)) % k)
        for label in (a, other):
            rows.append((x, label, b, label))
            prob.append(p / 2)
    return IBInstance(np.array(rows), np.array(prob), instance.beta)
