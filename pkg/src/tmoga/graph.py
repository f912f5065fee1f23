"""Snapshot / dynamic-network model and edge-list ingestion."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NodeRegistry:
    """Maps external node ids to dense indices 0..n-1."""

    def __init__(self, ids: Iterable[str] = ()):
        self._index: dict[str, int] = {}
        self._ids: list[str] = []
        for node_id in ids:
            self.add(node_id)

    def add(self, node_id: str) -> int:
        idx = self._index.get(node_id)
        if idx is None:
            idx = len(self._ids)
            self._index[node_id] = idx
            self._ids.append(node_id)
        return idx

    def index(self, node_id: str) -> int:
        return self._index[node_id]

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._index

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def ids(self) -> list[str]:
        return list(self._ids)

    def copy(self) -> "NodeRegistry":
        return NodeRegistry(self._ids)


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Undirected simple graph in CSR form.

    ``indices[indptr[u]:indptr[u + 1]]`` are the sorted neighbours of ``u``;
    ``edges`` holds every undirected edge once as a sorted ``(u, v)`` pair
    with ``u < v``.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    edges: np.ndarray
    _nbr_sets: list = field(default=None, repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Snapshot":
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise IndexError(f"edge endpoint outside 0..{n - 1}")
        arr = arr[arr[:, 0] != arr[:, 1]]
        arr = np.sort(arr, axis=1)
        arr = np.unique(arr, axis=0) if len(arr) else arr.reshape(0, 2)
        both = np.concatenate([arr, arr[:, ::-1]])
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=n) if len(both) else np.zeros(n, dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = both[:, 1].copy()
        for a in (indptr, indices, arr):
            a.setflags(write=False)
        return cls(n, indptr, indices, arr)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(u).tolist() for u in range(self.n)]

    def neighbor_sets(self) -> list[frozenset]:
        if self._nbr_sets is None:
            object.__setattr__(self, "_nbr_sets", [frozenset(self.neighbors(u).tolist()) for u in range(self.n)])
        return self._nbr_sets

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        if self.edge_count:
            a[self.edges[:, 0], self.edges[:, 1]] = 1
            a[self.edges[:, 1], self.edges[:, 0]] = 1
        return a

    def with_nodes(self, n: int) -> "Snapshot":
        """Same edges over a larger node universe (new nodes isolated)."""
        if n < self.n:
            raise ValueError("cannot shrink a snapshot")
        return Snapshot.from_edges(n, self.edges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Snapshot):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self) -> int:
        return hash((self.n, self.edges.tobytes()))


def internal_edge_count(snapshot: Snapshot, nodes: Iterable[int]) -> int:
    """Number of undirected edges with both endpoints in ``nodes``."""
    idx = np.fromiter(nodes, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= snapshot.n):
        raise IndexError(f"node index outside 0..{snapshot.n - 1}")
    member = np.zeros(snapshot.n, dtype=bool)
    member[idx] = True
    e = snapshot.edges
    return int(np.count_nonzero(member[e[:, 0]] & member[e[:, 1]]))


class Partition:
    """Disjoint, covering assignment of nodes to communities.

    Labels are canonicalised to ``0..k-1`` in order of first appearance, so
    two partitions are equal iff they group nodes identically.
    """

    __slots__ = ("labels", "_communities")

    def __init__(self, labels: Sequence[int] | np.ndarray):
        self.labels = canonical_labels(np.asarray(labels))
        self.labels.setflags(write=False)
        self._communities = None

    @classmethod
    def from_communities(cls, communities: Iterable[Iterable[int]], n: int | None = None) -> "Partition":
        groups = [sorted(set(c)) for c in communities]
        if n is None:
            n = sum(len(g) for g in groups)
        labels = np.full(n, -1, dtype=np.int64)
        for i, g in enumerate(groups):
            if not g:
                raise ValueError("empty community")
            if min(g) < 0 or max(g) >= n:
                raise IndexError(f"node index outside 0..{n - 1}")
            if np.any(labels[g] >= 0):
                raise ValueError("communities overlap")
            labels[g] = i
        if np.any(labels < 0):
            raise ValueError("communities do not cover all nodes")
        return cls(labels)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    @property
    def communities(self) -> list[list[int]]:
        if self._communities is None:
            order = np.argsort(self.labels, kind="stable")
            bounds = np.cumsum(np.bincount(self.labels, minlength=self.k))[:-1]
            self._communities = [c.tolist() for c in np.split(order, bounds)]
        return self._communities

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def key(self) -> bytes:
        return self.labels.tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self) -> int:
        return hash(self.key())

    def __len__(self) -> int:
        return self.k

    def __repr__(self) -> str:
        return f"Partition(k={self.k}, n={self.n})"


def canonical_labels(labels: np.ndarray) -> np.ndarray:
    """Relabel to 0..k-1 by order of first appearance."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return np.zeros(0, dtype=np.int64)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return rank[inverse.ravel()]


@dataclass(frozen=True)
class DynamicNetwork:
    snapshots: tuple[Snapshot, ...]
    registry: NodeRegistry

    def __post_init__(self):
        if not self.snapshots:
            raise ValueError("no snapshots")
        sizes = {s.n for s in self.snapshots}
        if len(sizes) != 1:
            raise ValueError(f"snapshots disagree on node count: {sorted(sizes)}")

    @property
    def n(self) -> int:
        return self.snapshots[0].n

    @property
    def T(self) -> int:
        return len(self.snapshots)

    def __len__(self) -> int:
        return len(self.snapshots)

    def __getitem__(self, t: int) -> Snapshot:
        return self.snapshots[t]

    def __iter__(self):
        return iter(self.snapshots)


def _iter_pairs(stream: TextIO):
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 2 node ids, got {len(tokens)}", lineno)
        yield tokens[0], tokens[1]


def load_edge_list(stream: TextIO, registry: NodeRegistry | None = None) -> Snapshot:
    """Parse a ``u v`` edge list.  Unseen ids are appended to ``registry``."""
    if registry is None:
        registry = NodeRegistry()
    edges = [(registry.add(a), registry.add(b)) for a, b in _iter_pairs(stream)]
    return Snapshot.from_edges(len(registry), edges)


def snapshot_files(source: str | os.PathLike | Sequence[str | os.PathLike]) -> list[Path]:
    if isinstance(source, (str, os.PathLike)):
        root = Path(source)
        if root.is_dir():
            files = sorted(p for p in root.iterdir() if p.is_file() and not p.name.startswith("."))
        else:
            files = [root]
    else:
        files = [Path(p) for p in source]
    return files


def load_dynamic(source, strict: bool = False) -> DynamicNetwork:
    """Load one snapshot per file.

    A directory is read in lexicographic filename order (so ``10.edges``
    sorts before ``2.edges``; zero-pad numeric names).  Every snapshot is
    rebased onto the union node universe; nodes missing from a file become
    isolated.  With ``strict=True`` differing node sets raise instead.
    """
    files = snapshot_files(source)
    if not files:
        raise ValueError("no snapshots")
    registry = NodeRegistry()
    raw = []
    seen_sets = []
    for path in files:
        with open(path, encoding="utf-8") as fh:
            try:
                edges = [(registry.add(a), registry.add(b)) for a, b in _iter_pairs(fh)]
            except ParseError as exc:
                err = ParseError(f"{path}: {exc}")
                err.line = exc.line
                raise err from None
        raw.append(edges)
        seen_sets.append({x for e in edges for x in e})
    n = len(registry)
    if strict:
        universe = set(range(n))
        for path, seen in zip(files, seen_sets):
            if seen != universe:
                raise ValueError(f"{path}: node set differs from the union universe")
    snaps = tuple(Snapshot.from_edges(n, e) for e in raw)
    return DynamicNetwork(snaps, registry)


def dump_edge_list(snapshot: Snapshot, stream: TextIO, ids: Sequence[str] | None = None) -> None:
    for u, v in snapshot.edges.tolist():
        if ids is None:
            stream.write(f"{u} {v}\n")
        else:
            stream.write(f"{ids[u]} {ids[v]}\n")


def load_partition(stream: TextIO, registry: NodeRegistry) -> Partition:
    """Read ``node_id label`` lines; every registered node must be labelled."""
    labels: dict[int, str] = {}
    for a, b in _iter_pairs(stream):
        if a not in registry:
            raise ParseError(f"unknown node id {a!r}")
        labels[registry.index(a)] = b
    if len(labels) != len(registry):
        missing = len(registry) - len(labels)
        raise ValueError(f"{missing} nodes have no label")
    tags = [labels[i] for i in range(len(registry))]
    return Partition(np.unique(tags, return_inverse=True)[1])


def dump_partition(partition: Partition, stream: TextIO, ids: Sequence[str] | None = None) -> None:
    for u, c in enumerate(partition.labels.tolist()):
        stream.write(f"{ids[u] if ids is not None else u} {c}\n")
