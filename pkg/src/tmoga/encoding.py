"""Locus-based adjacency genotypes.

A genotype is an int array ``genes`` with ``genes[u]`` either ``u`` or a
neighbour of ``u``.  Communities are the connected components of the graph
with edges ``u -- genes[u]``.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import Partition, Snapshot


class InvalidGenotypeError(ValueError):
    pass


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1


def check_genotype(snapshot: Snapshot, genes: np.ndarray) -> None:
    genes = np.asarray(genes)
    if genes.shape != (snapshot.n,):
        raise InvalidGenotypeError(f"genotype length {genes.shape} != {snapshot.n}")
    nbrs = snapshot.neighbor_sets()
    for u, g in enumerate(genes.tolist()):
        if g != u and g not in nbrs[u]:
            raise InvalidGenotypeError(f"gene {u} -> {g} is neither self nor a neighbour")


def is_valid(snapshot: Snapshot, genes: np.ndarray) -> bool:
    try:
        check_genotype(snapshot, genes)
    except InvalidGenotypeError:
        return False
    return True


def decode(genes, snapshot: Snapshot | None = None) -> Partition:
    """Union-find decoding of a single genotype.

    When ``snapshot`` is given the genotype is validated against it first.
    """
    genes = np.asarray(genes, dtype=np.int64)
    if snapshot is not None:
        check_genotype(snapshot, genes)
    uf = UnionFind(len(genes))
    for u, g in enumerate(genes.tolist()):
        uf.union(u, g)
    return Partition([uf.find(u) for u in range(len(genes))])


def decode_many(genotypes: np.ndarray) -> tuple[np.ndarray, int]:
    """Decode a ``(P, n)`` batch at once.

    Returns ``(components, count)`` where ``components[p, u]`` is a component
    id unique across the whole batch (ids of individual ``p`` never collide
    with those of another individual) and ``count`` is the number of ids.
    """
    genotypes = np.asarray(genotypes, dtype=np.int64)
    pop, n = genotypes.shape
    offset = (np.arange(pop, dtype=np.int64) * n)[:, None]
    rows = (np.arange(n, dtype=np.int64)[None, :] + offset).ravel()
    cols = (genotypes + offset).ravel()
    graph = csr_matrix((np.ones(pop * n, dtype=np.int8), (rows, cols)), shape=(pop * n, pop * n))
    count, comp = connected_components(graph, directed=True, connection="weak")
    return comp.reshape(pop, n).astype(np.int64), int(count)


def _encode_flat(labels: np.ndarray, indptr: np.ndarray, indices: np.ndarray,
                 rng: np.random.Generator) -> np.ndarray:
    n = len(labels)
    deg = np.diff(indptr)
    src = np.repeat(np.arange(n), deg)
    same = labels[src] == labels[indices]
    count = np.bincount(src[same], minlength=n)
    # position of each node's first same-label neighbour within the flat list
    start = np.concatenate(([0], np.cumsum(count)[:-1]))
    pick = np.floor(rng.random(n) * count).astype(np.int64)
    flat = indices[same]
    genes = np.arange(n, dtype=np.int64)
    has = count > 0
    genes[has] = flat[start[has] + pick[has]]
    return genes


def encode(partition, snapshot: Snapshot, rng: np.random.Generator) -> np.ndarray:
    """Point every node at a random neighbour with the same label (else itself).

    A community that is disconnected in ``snapshot`` decodes back as several
    communities.
    """
    labels = partition.labels if isinstance(partition, Partition) else np.asarray(partition)
    return _encode_flat(labels, snapshot.indptr, snapshot.indices, rng)


def _tiled(snapshot: Snapshot, pop: int) -> tuple[np.ndarray, np.ndarray]:
    """CSR arrays of ``pop`` disjoint copies of ``snapshot``."""
    n, nnz = snapshot.n, len(snapshot.indices)
    indptr = (snapshot.indptr[None, :-1] + nnz * np.arange(pop)[:, None]).ravel()
    indptr = np.append(indptr, nnz * pop)
    indices = (snapshot.indices[None, :] + n * np.arange(pop)[:, None]).ravel()
    return indptr, indices


def encode_many(labels: np.ndarray, snapshot: Snapshot, rng: np.random.Generator) -> np.ndarray:
    """Row-wise :func:`encode` of a ``(P, n)`` label array."""
    labels = np.asarray(labels, dtype=np.int64)
    pop, n = labels.shape
    indptr, indices = _tiled(snapshot, pop)
    # offset rows so labels never collide across copies
    flat = (labels + (labels.max() + 1) * np.arange(pop)[:, None]).ravel()
    return (_encode_flat(flat, indptr, indices, rng).reshape(pop, n) - n * np.arange(pop)[:, None])


def random_genotype(snapshot: Snapshot, rng: np.random.Generator) -> np.ndarray:
    """Each gene drawn uniformly from ``adj(u) + {u}``."""
    deg = snapshot.degrees
    pick = np.floor(rng.random(snapshot.n) * (deg + 1)).astype(np.int64)
    genes = np.arange(snapshot.n, dtype=np.int64)
    nb = pick < deg
    genes[nb] = snapshot.indices[snapshot.indptr[:-1][nb] + pick[nb]]
    return genes


def _propagate(labels: np.ndarray, indptr: np.ndarray, indices: np.ndarray, iterations: int) -> np.ndarray:
    n = len(labels)
    deg = np.diff(indptr)
    src = np.repeat(np.arange(n, dtype=np.int64), deg)
    has_nbrs = deg > 0
    for _ in range(iterations):
        lo = labels.min()
        k = int(labels.max() - lo) + 1
        if k > 4 * n:
            # compress sparse label values so node * k stays small
            tags, lab = np.unique(labels, return_inverse=True)
            k = len(tags)
        else:
            tags, lab = None, labels - lo
        # runs of equal (node, label) keys; sorted, so the first maximal run
        # of a node carries its smallest tied label
        keys = np.sort(src * k + lab[indices])
        starts = np.flatnonzero(np.concatenate(([True], keys[1:] != keys[:-1])))
        counts = np.diff(np.append(starts, len(keys)))
        keys = keys[starts]
        node = keys // k
        head = np.flatnonzero(np.concatenate(([True], node[1:] != node[:-1])))
        best = np.maximum.reduceat(counts, head)
        owner_best = np.repeat(best, np.diff(np.append(head, len(node))))
        is_top = counts == owner_best
        keep = np.zeros(n, dtype=bool)
        keep[node[is_top & (keys == node * k + lab[node])]] = True
        top = np.flatnonzero(is_top)
        first = top[np.concatenate(([True], node[top][1:] != node[top][:-1]))]
        winner = np.empty(n, dtype=np.int64)
        won = keys[first] % k
        winner[node[first]] = won + lo if tags is None else tags[won]
        change = has_nbrs & ~keep
        labels = labels.copy()
        labels[change] = winner[change]
    return labels


def label_propagation(snapshot: Snapshot, labels, iterations: int) -> np.ndarray:
    """Synchronous label propagation.

    Each sweep recomputes every label from the previous vector: a node adopts
    the most frequent neighbour label, keeps its own label when that ties for
    the maximum, and otherwise takes the smallest tied label.  Isolated nodes
    never change.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    labels = np.array(labels, dtype=np.int64, copy=True)
    if snapshot.edge_count == 0 or iterations == 0:
        return labels
    return _propagate(labels, snapshot.indptr, snapshot.indices, iterations)


def label_propagation_many(snapshot: Snapshot, labels, iterations: int) -> np.ndarray:
    """Row-wise :func:`label_propagation` of a ``(P, n)`` label array in one pass."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    labels = np.array(labels, dtype=np.int64, copy=True)
    if labels.ndim != 2:
        raise ValueError("expected a (P, n) label array")
    if snapshot.edge_count == 0 or iterations == 0:
        return labels
    pop = len(labels)
    lo = labels.min()
    span = labels.max() - lo + 1
    # a per-row offset keeps the within-row label order, hence the tie rule
    offset = span * np.arange(pop, dtype=np.int64)[:, None]
    indptr, indices = _tiled(snapshot, pop)
    out = _propagate((labels - lo + offset).ravel(), indptr, indices, iterations)
    return out.reshape(labels.shape) - offset + lo
