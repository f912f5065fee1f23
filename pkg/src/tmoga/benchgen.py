"""Ground-truthed dynamic network generators.

``gen_synfix`` / ``gen_synvar`` follow the Girvan-Newman style planted
partition with expected degree 16, of which ``z`` edges per node leave the
node's community.  ``gen_events`` is a simplified event-driven generator in
the spirit of LFR-based dynamic benchmarks (bounded uniform degrees rather
than power laws).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import DynamicNetwork, NodeRegistry, Partition, Snapshot, dump_edge_list, dump_partition

DEGREE = 16
EVENT_MODELS = ("birth-death", "expand-contract", "intermittent", "merge-split")


@dataclass
class GroundTruthSequence:
    network: DynamicNetwork
    truths: list[Partition]
    event_log: list[dict] = field(default_factory=list)

    def community_counts(self) -> list[int]:
        return [p.k for p in self.truths]

    def write(self, out_dir, manifest_extra: dict | None = None) -> dict:
        """Write ``snapshots/tXX.edges``, ``truth/tXX.txt``, ``events.json`` and ``manifest.json``."""
        out = Path(out_dir)
        (out / "snapshots").mkdir(parents=True, exist_ok=True)
        (out / "truth").mkdir(parents=True, exist_ok=True)
        ids = self.network.registry.ids
        width = max(2, len(str(self.network.T)))
        for t, (snap, truth) in enumerate(zip(self.network, self.truths), start=1):
            with open(out / "snapshots" / f"t{t:0{width}d}.edges", "w", encoding="utf-8") as fh:
                fh.write("# isolated nodes are listed in the truth file only\n")
                dump_edge_list(snap, fh, ids)
            with open(out / "truth" / f"t{t:0{width}d}.txt", "w", encoding="utf-8") as fh:
                dump_partition(truth, fh, ids)
        with open(out / "events.json", "w", encoding="utf-8") as fh:
            json.dump(self.event_log, fh, indent=1)
        manifest = {
            "snapshots": self.network.T,
            "nodes": self.network.n,
            "community_counts": self.community_counts(),
            "edge_counts": [s.edge_count for s in self.network],
        }
        manifest.update(manifest_extra or {})
        with open(out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=1)
        return manifest


def _planted_edges(labels: np.ndarray, p_in: np.ndarray, z: float, rng: np.random.Generator) -> np.ndarray:
    """Sample each pair independently: ``p_in[c]`` inside community ``c``, else
    ``(z/(n-|C_u|) + z/(n-|C_v|)) / 2``."""
    n = len(labels)
    size = np.bincount(labels)
    iu, iv = np.triu_indices(n, k=1)
    same = labels[iu] == labels[iv]
    prob = np.empty(len(iu))
    prob[same] = p_in[labels[iu[same]]]
    out_u = z / np.maximum(n - size[labels[iu[~same]]], 1)
    out_v = z / np.maximum(n - size[labels[iv[~same]]], 1)
    prob[~same] = 0.5 * (out_u + out_v)
    hit = rng.random(len(iu)) < prob
    return np.column_stack([iu[hit], iv[hit]])


def _gn_snapshot(labels: np.ndarray, z: float, rng: np.random.Generator) -> Snapshot:
    size = np.bincount(labels)
    p_in = np.clip((DEGREE - z) / np.maximum(size - 1, 1), 0.0, 1.0)
    return Snapshot.from_edges(len(labels), _planted_edges(labels, p_in, z, rng))


def _sequence(label_seq: list[np.ndarray], snaps: list[Snapshot], log: list[dict]) -> GroundTruthSequence:
    n = len(label_seq[0])
    registry = NodeRegistry(str(i) for i in range(n))
    return GroundTruthSequence(DynamicNetwork(tuple(snaps), registry), [Partition(l) for l in label_seq], log)


def _check_z(z: float) -> None:
    if not 0 <= z <= DEGREE:
        raise ValueError(f"z must lie in [0, {DEGREE}]")


def gen_synfix(z: float, seed: int | None = None, snapshots: int = 10, communities: int = 4,
               community_size: int = 32, movers: int = 3) -> GroundTruthSequence:
    """Fixed number of communities; ``movers`` nodes per community switch each step.

    Intra-community pairs connect with probability ``(16 - z) / 31`` and
    inter-community pairs with ``z / 96`` (for the default 4 x 32 layout).
    All edges are regenerated at every step.
    """
    _check_z(z)
    rng = np.random.default_rng(seed)
    n = communities * community_size
    labels = np.repeat(np.arange(communities), community_size)
    p_in = np.full(communities, (DEGREE - z) / (community_size - 1))
    p_out = z / (n - community_size)
    label_seq, snaps, log = [], [], []
    for t in range(1, snapshots + 1):
        if t > 1:
            labels = labels.copy()
            moving = []
            for c in range(communities):
                members = np.flatnonzero(labels == c)
                moving.extend(rng.choice(members, size=min(movers, len(members)), replace=False).tolist())
            for u in moving:
                others = [c for c in range(communities) if c != labels[u]]
                labels[u] = others[int(rng.integers(len(others)))]
            log.append({"time": t, "event": "move", "nodes": sorted(moving)})
        iu, iv = np.triu_indices(n, k=1)
        same = labels[iu] == labels[iv]
        hit = rng.random(len(iu)) < np.where(same, p_in[0], p_out)
        snaps.append(Snapshot.from_edges(n, np.column_stack([iu[hit], iv[hit]])))
        label_seq.append(labels)
    return _sequence(label_seq, snaps, log)


def gen_synvar(z: float, seed: int | None = None, communities: int = 4, community_size: int = 64,
               split: int = 8) -> GroundTruthSequence:
    """Variable number of communities over 10 snapshots.

    Steps 2-5 each pull ``split`` nodes from every original community into one
    new community; step 6 repeats step 5; steps 7-10 undo the splits in
    reverse order, so the community counts run 4,5,6,7,8,8,7,6,5,4.
    """
    _check_z(z)
    rng = np.random.default_rng(seed)
    n = communities * community_size
    labels = np.repeat(np.arange(communities), community_size)
    label_seq = [labels]
    moves = []
    for step in range(communities):
        labels = labels.copy()
        new_label = communities + step
        taken = []
        for c in range(communities):
            members = np.flatnonzero(labels == c)
            taken.extend(rng.choice(members, size=split, replace=False).tolist())
        labels[taken] = new_label
        moves.append((new_label, taken))
        label_seq.append(labels)
    label_seq.append(labels.copy())
    original = np.repeat(np.arange(communities), community_size)
    for new_label, taken in reversed(moves):
        labels = labels.copy()
        labels[taken] = original[taken]
        label_seq.append(labels)
    log = []
    for t in range(2, len(label_seq) + 1):
        ka, kb = len(np.unique(label_seq[t - 2])), len(np.unique(label_seq[t - 1]))
        if kb > ka:
            log.append({"time": t, "event": "split", "communities": [int(label_seq[t - 1].max())]})
        elif kb < ka:
            log.append({"time": t, "event": "merge-back", "communities": [int(label_seq[t - 2].max())]})
    snaps = [_gn_snapshot(l, z, rng) for l in label_seq]
    return _sequence(label_seq, snaps, log)


@dataclass(frozen=True)
class EventParams:
    nodes: int = 1000
    snapshots: int = 5
    avg_degree: int = 8
    max_degree: int = 15
    mixing: float = 0.2
    min_community: int = 24
    max_community: int = 35
    reassign: float = 0.2
    events: int = 3
    rate: float = 0.25
    hide_rate: float = 0.1
    birth_fraction: float = 0.1


def _community_sizes(p: EventParams, rng: np.random.Generator) -> list[int]:
    lo, hi = p.min_community, p.max_community
    kmin, kmax = math.ceil(p.nodes / hi), p.nodes // lo
    if kmin > kmax:
        raise ValueError(f"cannot split {p.nodes} nodes into communities of size {lo}..{hi}")
    k = min(max(round(p.nodes / ((lo + hi) / 2)), kmin), kmax)
    sizes = np.full(k, lo)
    spare = p.nodes - k * lo
    while spare:
        room = np.flatnonzero(sizes < hi)
        sizes[rng.choice(room)] += 1
        spare -= 1
    return sizes.tolist()


class _Membership:
    """Community id per node; ids are never reused."""

    def __init__(self, labels: np.ndarray):
        self.labels = labels
        self.next_id = int(labels.max()) + 1

    def ids(self) -> list[int]:
        return sorted(set(self.labels[self.labels >= 0].tolist()))

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)

    def new_id(self) -> int:
        self.next_id += 1
        return self.next_id - 1


def _event_snapshot(labels: np.ndarray, active: np.ndarray, p: EventParams, rng: np.random.Generator) -> Snapshot:
    """Stub-matching planted partition over ``active`` nodes."""
    n = len(labels)
    lo = max(1, 2 * p.avg_degree - p.max_degree)
    deg = rng.integers(lo, p.max_degree + 1, size=n)
    k_in = np.rint((1.0 - p.mixing) * deg).astype(np.int64)
    k_out = deg - k_in
    edges = []
    idx = np.flatnonzero(active)
    for c in np.unique(labels[idx]):
        members = idx[labels[idx] == c]
        stubs = np.repeat(members, np.minimum(k_in[members], len(members) - 1))
        rng.shuffle(stubs)
        if len(stubs) % 2:
            stubs = stubs[:-1]
        edges.append(stubs.reshape(-1, 2))
    stubs = np.repeat(idx, k_out[idx])
    rng.shuffle(stubs)
    if len(stubs) % 2:
        stubs = stubs[:-1]
    pairs = stubs.reshape(-1, 2)
    edges.append(pairs[labels[pairs[:, 0]] != labels[pairs[:, 1]]])
    return Snapshot.from_edges(n, np.concatenate(edges) if edges else np.zeros((0, 2), dtype=np.int64))


def gen_events(model: str, params: EventParams | None = None, seed: int | None = None) -> GroundTruthSequence:
    """Planted-partition snapshots with per-step membership churn and one event type.

    Each step after the first reassigns a ``reassign`` fraction of nodes to
    random other communities, then applies the model's event:

    * ``birth-death``: ``events`` new communities formed from nodes donated by
      existing ones (each donor gives ``birth_fraction`` of its members) and
      ``events`` communities dissolved into the rest.
    * ``expand-contract``: ``events`` communities grow by ``rate`` of their
      size (taking random outside nodes), ``events`` shrink by ``rate``.
    * ``intermittent``: ``hide_rate`` of the communities vanish for one step:
      their nodes are isolated and labelled as singletons in the truth.
    * ``merge-split``: ``events`` pairs merge and ``events`` communities halve.
    """
    if model not in EVENT_MODELS:
        raise ValueError(f"unknown event model {model!r}; choose from {', '.join(EVENT_MODELS)}")
    p = params or EventParams()
    rng = np.random.default_rng(seed)
    sizes = _community_sizes(p, rng)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    rng.shuffle(labels)
    state = _Membership(labels)
    label_seq, snaps, log = [], [], []
    hidden: list[int] = []
    for t in range(1, p.snapshots + 1):
        if t > 1:
            _reassign(state, p.reassign, rng)
            hidden = _apply_event(model, state, p, rng, t, log, hidden)
        active = ~np.isin(state.labels, hidden)
        snaps.append(_event_snapshot(state.labels, active, p, rng))
        truth = state.labels.copy()
        if hidden:
            iso = np.flatnonzero(~active)
            truth[iso] = state.labels.max() + 1 + np.arange(len(iso))
        label_seq.append(truth)
    return _sequence(label_seq, snaps, log)


def _reassign(state: _Membership, fraction: float, rng: np.random.Generator) -> None:
    ids = state.ids()
    if len(ids) < 2:
        return
    pool = np.flatnonzero(np.isin(state.labels, ids))
    movers = rng.choice(pool, size=int(round(fraction * len(pool))), replace=False)
    for u in movers:
        choice = ids[int(rng.integers(len(ids) - 1))]
        if choice == state.labels[u]:
            choice = ids[-1]
        state.labels[u] = choice


def _pick(ids: list[int], count: int, rng: np.random.Generator) -> list[int]:
    count = min(count, len(ids))
    return [ids[i] for i in rng.choice(len(ids), size=count, replace=False)]


def _apply_event(model: str, state: _Membership, p: EventParams, rng: np.random.Generator,
                 t: int, log: list[dict], hidden: list[int]) -> list[int]:
    ids = [c for c in state.ids() if c not in hidden]
    if model == "birth-death":
        born = []
        for _ in range(p.events):
            target = int(rng.integers(p.min_community, p.max_community + 1))
            new = state.new_id()
            donors = list(rng.permutation(ids))
            taken = 0
            for c in donors:
                if taken >= target:
                    break
                members = state.members(c)
                give = min(max(1, int(round(p.birth_fraction * len(members)))), target - taken, len(members) - 1)
                if give <= 0:
                    continue
                state.labels[rng.choice(members, size=give, replace=False)] = new
                taken += give
            born.append(new)
        dead = _pick([c for c in ids if c not in born], p.events, rng)
        survivors = [c for c in state.ids() if c not in dead]
        for c in dead:
            members = state.members(c)
            state.labels[members] = rng.choice(survivors, size=len(members))
        log.append({"time": t, "event": "birth", "communities": born})
        log.append({"time": t, "event": "death", "communities": dead})
        return []
    if model == "expand-contract":
        chosen = _pick(ids, 2 * p.events, rng)
        grow, shrink = chosen[: p.events], chosen[p.events:]
        for c in grow:
            members = state.members(c)
            outside = np.flatnonzero(~np.isin(state.labels, [c, *shrink]))
            extra = min(int(round(p.rate * len(members))), len(outside))
            state.labels[rng.choice(outside, size=extra, replace=False)] = c
        for c in shrink:
            members = state.members(c)
            lose = min(int(round(p.rate * len(members))), len(members) - 1)
            others = [x for x in state.ids() if x != c]
            gone = rng.choice(members, size=lose, replace=False)
            state.labels[gone] = rng.choice(others, size=lose)
        log.append({"time": t, "event": "expand", "communities": grow})
        log.append({"time": t, "event": "contract", "communities": shrink})
        return []
    if model == "intermittent":
        if hidden:
            log.append({"time": t, "event": "reappear", "communities": hidden})
        candidates = [c for c in state.ids() if c not in hidden]
        now_hidden = _pick(candidates, max(1, int(round(p.hide_rate * len(state.ids())))), rng)
        log.append({"time": t, "event": "hide", "communities": now_hidden})
        return now_hidden
    # merge-split
    chosen = _pick(ids, 3 * p.events, rng)
    merges = chosen[: 2 * p.events]
    splits = chosen[2 * p.events:]
    merged = []
    for a, b in zip(merges[0::2], merges[1::2]):
        state.labels[state.members(b)] = a
        merged.append([a, b])
    created = []
    for c in splits:
        members = rng.permutation(state.members(c))
        new = state.new_id()
        state.labels[members[: len(members) // 2]] = new
        created.append([c, new])
    log.append({"time": t, "event": "merge", "communities": merged})
    log.append({"time": t, "event": "split", "communities": created})
    return []
