"""Leiden community detection with a modularity objective.

Runs on the symmetrized forward graph: w(u, v) = w(u -> v) + w(v -> u).
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .graph import ForwardGraph

log = logging.getLogger(__name__)

_EPS = 1e-12


@dataclass
class CommunityAssignment:
    membership: dict[int, int]  # channel id -> community id (dense from 0)

    @property
    def n_communities(self) -> int:
        return len(set(self.membership.values()))

    def communities(self) -> list[list[int]]:
        groups: list[list[int]] = [[] for _ in range(self.n_communities)]
        for node in sorted(self.membership):
            groups[self.membership[node]].append(node)
        return groups


@dataclass
class _Level:
    """Undirected weighted graph used inside the optimizer."""

    adj: list[dict[int, float]]  # no self entries
    loops: np.ndarray            # self-loop weight per node
    strength: np.ndarray         # k_i = sum_j w_ij + 2 * loop_i

    @property
    def n(self) -> int:
        return len(self.adj)


def symmetrize(g: ForwardGraph) -> list[dict[int, float]]:
    adj: list[dict[int, float]] = [{} for _ in range(len(g))]
    for i, nbrs in enumerate(g.out_adj):
        for j, w in nbrs.items():
            adj[i][j] = adj[i].get(j, 0.0) + w
            adj[j][i] = adj[j].get(i, 0.0) + w
    return adj


def _base_level(g: ForwardGraph) -> _Level:
    adj = symmetrize(g)
    strength = np.array([sum(a.values()) for a in adj], dtype=float)
    return _Level(adj, np.zeros(len(adj)), strength)


def _relabel(labels: np.ndarray) -> np.ndarray:
    out = np.empty_like(labels)
    seen: dict[int, int] = {}
    for i, c in enumerate(labels):
        out[i] = seen.setdefault(int(c), len(seen))
    return out


def _move_nodes(level: _Level, comm: np.ndarray, gamma: float, two_m: float, rng) -> np.ndarray:
    comm = comm.copy()
    n = level.n
    k = level.strength
    tot = np.zeros(n)
    size = np.zeros(n, dtype=np.int64)
    np.add.at(tot, comm, k)
    np.add.at(size, comm, 1)
    empty = [c for c in range(n - 1, -1, -1) if size[c] == 0]
    queue = deque(int(v) for v in rng.permutation(n))
    queued = np.ones(n, dtype=bool)
    while queue:
        v = queue.popleft()
        queued[v] = False
        cv = comm[v]
        links: dict[int, float] = {}
        for u, w in level.adj[v].items():
            c = comm[u]
            links[c] = links.get(c, 0.0) + w
        tot[cv] -= k[v]
        size[cv] -= 1
        scale = gamma * k[v] / two_m
        best, best_gain = cv, links.get(cv, 0.0) - scale * tot[cv]
        for c in sorted(links):
            gain = links[c] - scale * tot[c]
            if gain > best_gain + _EPS:
                best, best_gain = c, gain
        if best_gain < -_EPS:
            # an empty community beats every occupied one
            if size[cv] == 0:
                best = cv
            else:
                best = empty.pop()
        if size[cv] == 0 and best != cv:
            empty.append(cv)
        tot[best] += k[v]
        size[best] += 1
        comm[v] = best
        if best != cv:
            for u in level.adj[v]:
                if comm[u] != best and not queued[u]:
                    queued[u] = True
                    queue.append(u)
    return comm


def _refine(level: _Level, comm: np.ndarray, gamma: float, two_m: float, rng) -> np.ndarray:
    n = level.n
    k = level.strength
    ref = np.arange(n)
    ref_tot = k.copy()
    ref_size = np.ones(n, dtype=np.int64)
    ref_ext = np.zeros(n)  # weight from refined community to rest of its parent
    comm_tot = np.zeros(n)
    np.add.at(comm_tot, comm, k)
    for v in range(n):
        ref_ext[v] = sum(w for u, w in level.adj[v].items() if comm[u] == comm[v])
    order = rng.permutation(n)
    for v in (int(x) for x in order):
        c = comm[v]
        kc = comm_tot[c]
        if ref_size[ref[v]] != 1:
            continue
        if ref_ext[v] < gamma * k[v] * (kc - k[v]) / two_m - _EPS:
            continue
        links: dict[int, float] = {}
        for u, w in level.adj[v].items():
            if comm[u] == c:
                r = ref[u]
                links[r] = links.get(r, 0.0) + w
        scale = gamma * k[v] / two_m
        best, best_gain = -1, _EPS
        for r in sorted(links):
            if r == ref[v]:
                continue
            if ref_ext[r] < gamma * ref_tot[r] * (kc - ref_tot[r]) / two_m - _EPS:
                continue
            gain = links[r] - scale * ref_tot[r]
            if gain > best_gain:
                best, best_gain = r, gain
        if best < 0:
            continue
        old = ref[v]
        ref_ext[best] = ref_ext[best] + ref_ext[v] - 2.0 * links[best]
        ref_tot[best] += k[v]
        ref_size[best] += 1
        ref_size[old] = 0
        ref_tot[old] = 0.0
        ref[v] = best
    return _relabel(ref)


def _aggregate(level: _Level, part: np.ndarray) -> _Level:
    n_new = int(part.max()) + 1
    adj: list[dict[int, float]] = [{} for _ in range(n_new)]
    loops = np.zeros(n_new)
    np.add.at(loops, part, level.loops)
    for v, nbrs in enumerate(level.adj):
        a = part[v]
        for u, w in nbrs.items():
            b = part[u]
            if a == b:
                loops[a] += w / 2.0  # each internal edge is visited from both ends
            else:
                adj[a][b] = adj[a].get(b, 0.0) + w
    strength = np.zeros(n_new)
    np.add.at(strength, part, level.strength)
    return _Level(adj, loops, strength)


def _split_disconnected(adj: list[dict[int, float]], labels: np.ndarray) -> np.ndarray:
    out = np.full(labels.size, -1)
    nxt = 0
    for s in range(labels.size):
        if out[s] != -1:
            continue
        out[s] = nxt
        stack = [s]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if out[u] == -1 and labels[u] == labels[s]:
                    out[u] = nxt
                    stack.append(u)
        nxt += 1
    return out


def _quality(level: _Level, labels: np.ndarray, gamma: float) -> float:
    two_m = level.strength.sum()
    if two_m == 0:
        return 0.0
    m = two_m / 2.0
    n_c = int(labels.max()) + 1
    internal = np.zeros(n_c)
    np.add.at(internal, labels, level.loops)
    for v, nbrs in enumerate(level.adj):
        for u, w in nbrs.items():
            if u > v and labels[u] == labels[v]:
                internal[labels[v]] += w
    tot = np.zeros(n_c)
    np.add.at(tot, labels, level.strength)
    return float((internal / m - gamma * (tot / two_m) ** 2).sum())


def _leiden_pass(base: _Level, init: np.ndarray, gamma: float, rng, max_levels: int = 100) -> np.ndarray:
    two_m = float(base.strength.sum())
    level = base
    comm = init.copy()
    node_of = np.arange(base.n)  # base node -> node of current level
    for _ in range(max_levels):
        comm = _move_nodes(level, comm, gamma, two_m, rng)
        comm = _relabel(comm)
        if int(comm.max()) + 1 == level.n:
            break
        refined = _refine(level, comm, gamma, two_m, rng)
        if int(refined.max()) + 1 == level.n:
            refined = comm  # refinement stalled; collapse the moved partition instead
        parent = np.zeros(int(refined.max()) + 1, dtype=np.int64)
        parent[refined] = comm
        level = _aggregate(level, refined)
        node_of = refined[node_of]
        comm = parent
    return comm[node_of]


def leiden(
    g: ForwardGraph,
    resolution: float = 1.0,
    seed: int = 0,
    n_iterations: int = -1,
    initial: Optional[CommunityAssignment] = None,
) -> CommunityAssignment:
    """Partition ``g`` by Leiden (local moving, refinement, aggregation).

    ``n_iterations < 0`` repeats full passes until the partition stops
    changing (at most 20). Communities are always internally connected and
    numbered densely from 0 in order of their smallest channel id.
    """
    if len(g) == 0:
        raise ValueError("empty graph")
    rng = np.random.default_rng(seed)
    base = _base_level(g)
    if initial is None:
        labels = np.arange(len(g))
    else:
        labels = _relabel(np.array([initial.membership[n] for n in g.nodes]))
    if base.strength.sum() > 0:
        rounds = 20 if n_iterations < 0 else n_iterations
        for _ in range(rounds):
            new = _relabel(_leiden_pass(base, labels, resolution, rng))
            new = _split_disconnected(base.adj, new)
            changed = not np.array_equal(new, labels)
            if _quality(base, new, resolution) >= _quality(base, labels, resolution) - _EPS:
                labels = new
            else:
                changed = False
            if n_iterations < 0 and not changed:
                break
    labels = _relabel(_split_disconnected(base.adj, labels))
    return CommunityAssignment({node: int(c) for node, c in zip(g.nodes, labels)})


def modularity(g: ForwardGraph, a: CommunityAssignment, resolution: float = 1.0) -> float:
    """Sum over communities of w_in/W - resolution * (deg/2W)**2 on the symmetrized graph."""
    missing = [n for n in g.nodes if n not in a.membership]
    if missing:
        raise KeyError(f"assignment missing nodes: {missing[:5]}")
    labels = _relabel(np.array([a.membership[n] for n in g.nodes])) if len(g) else np.zeros(0, int)
    if len(g) == 0:
        return 0.0
    return _quality(_base_level(g), labels, resolution)


@dataclass
class CommunityMatch:
    nodes: set[int]
    communities: list[int]

    @property
    def spans_multiple(self) -> bool:
        return len(self.communities) > 1


def community_of(a: CommunityAssignment, anchors: Iterable[int]) -> CommunityMatch:
    """Union of the communities holding any anchor; warns when anchors are split."""
    anchors = list(anchors)
    if not anchors:
        raise ValueError("no anchors given")
    unknown = [x for x in anchors if x not in a.membership]
    if unknown:
        raise KeyError(f"unknown anchor nodes: {unknown[:5]}")
    comms = sorted({a.membership[x] for x in anchors})
    if len(comms) > 1:
        log.warning("anchors span %d communities: %s", len(comms), comms)
    wanted = set(comms)
    return CommunityMatch({n for n, c in a.membership.items() if c in wanted}, comms)
