"""Dense-subgraph ("small clique") discovery inside communities."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .graph import Partition, Snapshot
from .metrics import cid


@dataclass
class CliqueSet:
    cliques: list[list[int]] = field(default_factory=list)
    source_snapshot: int | None = None

    def __len__(self) -> int:
        return len(self.cliques)

    def __iter__(self):
        return iter(self.cliques)

    def nodes(self) -> set[int]:
        return {u for c in self.cliques for u in c}

    def dump(self, stream: TextIO) -> None:
        for c in self.cliques:
            stream.write(" ".join(str(u) for u in sorted(c)) + "\n")


class _Search:
    """Backtracking search over one community with a shared node-expansion counter."""

    def __init__(self, snapshot: Snapshot, community: set[int], threshold: float, max_depth: int):
        self.nbrs = snapshot.neighbor_sets()
        self.community = community
        self.threshold = threshold
        self.max_depth = max_depth
        self.expansions = 0

    def forward(self, node: int, exclude) -> list[int]:
        return sorted(v for v in self.nbrs[node] & self.community if v > node and v not in exclude)

    def grow(self, subgraph: list[int], links: int, candidates: list[int], searched: set[int]) -> list[int]:
        # links = undirected edges inside subgraph
        best = subgraph
        candidates = list(candidates)
        members = set(subgraph)
        while candidates:
            node = candidates.pop(0)
            self.expansions += 1
            new_candidates = candidates + [
                v for v in self.forward(node, searched) if v not in members and v not in candidates
            ]
            new_links = links + len(self.nbrs[node] & members)
            size = len(subgraph) + 1
            if 2.0 * new_links / (size * (size - 1)) < self.threshold:
                continue
            new_subgraph = subgraph + [node]
            if size >= self.max_depth:
                return new_subgraph
            result = self.grow(new_subgraph, new_links, new_candidates, searched)
            if len(result) > len(best):
                best = result
                if len(best) >= self.max_depth:
                    # nothing deeper can replace a subgraph already at the cap
                    break
        return best if len(best) >= 3 else []


def extract_cliques(
    snapshot: Snapshot,
    community: Iterable[int],
    cid_threshold: float,
    max_depth: int,
    stats: dict | None = None,
) -> CliqueSet:
    """Greedy ordered backtracking for node-disjoint dense subgraphs.

    A community of size <= 2 yields nothing; a community whose own CID
    reaches the threshold is returned whole.  Otherwise each unsearched node,
    in ascending order, seeds a depth-first search over larger-index
    unsearched neighbours inside the community.  Branches below the CID
    threshold are pruned and subgraphs are capped at ``max_depth`` nodes.
    The largest subgraph of size >= 3 found from a seed is kept and its nodes
    marked searched.
    """
    if not 0.0 <= cid_threshold <= 1.0:
        raise ValueError("cid_threshold must lie in [0, 1]")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    members = sorted(set(community))
    if len(members) <= 2:
        return CliqueSet()
    if cid(snapshot, members) >= cid_threshold:
        return CliqueSet([members])
    search = _Search(snapshot, set(members), cid_threshold, max_depth)
    found: list[list[int]] = []
    searched: set[int] = set()
    for node in members:
        if node in searched:
            continue
        clique = search.grow([node], 0, search.forward(node, searched), searched)
        # a cap below 3 can hand back a bare pair
        if len(clique) >= 3:
            found.append(sorted(clique))
            searched.update(clique)
    if stats is not None:
        stats["expansions"] = stats.get("expansions", 0) + search.expansions
    return CliqueSet(found)


def extract_all(
    snapshot: Snapshot,
    partition: Partition,
    cid_threshold: float,
    max_depth: int,
    source_snapshot: int | None = None,
    stats: dict | None = None,
) -> CliqueSet:
    out = CliqueSet(source_snapshot=source_snapshot)
    for community in partition.communities:
        out.cliques.extend(extract_cliques(snapshot, community, cid_threshold, max_depth, stats).cliques)
    return out
