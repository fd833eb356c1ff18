"""Forward graph: u -> v when channel u carries a message forwarded from v."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .data_model import Dataset


class ConvergenceError(RuntimeError):
    def __init__(self, iterations: int, delta: float):
        self.iterations = iterations
        self.delta = delta
        super().__init__(f"PageRank did not converge in {iterations} iterations (L1 delta {delta:.3e})")


@dataclass
class ForwardGraph:
    """Directed weighted graph over channel ids.

    ``out_adj[i]`` / ``in_adj[i]`` map neighbour indices to edge weights, with
    indices referring to positions in ``nodes`` (sorted channel ids).
    """

    nodes: tuple[int, ...]
    out_adj: list[dict[int, int]]
    in_adj: list[dict[int, int]]
    external_forwards: int = 0
    self_forwards: int = 0
    index: dict[int, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {n: i for i, n in enumerate(self.nodes)}

    @classmethod
    def from_edges(cls, nodes: Iterable[int], edges: Iterable[tuple[int, int, int]]) -> "ForwardGraph":
        """Build from ``(src, dst, weight)`` triples; repeated pairs add up, self-loops are dropped."""
        node_list = tuple(sorted(set(nodes)))
        idx = {n: i for i, n in enumerate(node_list)}
        out_adj: list[dict[int, int]] = [{} for _ in node_list]
        in_adj: list[dict[int, int]] = [{} for _ in node_list]
        loops = 0
        for u, v, w in edges:
            if w < 1:
                raise ValueError(f"edge weight must be >= 1, got {w}")
            if u not in idx or v not in idx:
                raise KeyError(f"edge endpoint not in node set: {u}->{v}")
            if u == v:
                loops += w
                continue
            a, b = idx[u], idx[v]
            out_adj[a][b] = out_adj[a].get(b, 0) + w
            in_adj[b][a] = in_adj[b].get(a, 0) + w
        return cls(node_list, out_adj, in_adj, self_forwards=loops, index=idx)

    def __len__(self) -> int:
        return len(self.nodes)

    def edges(self):
        """Yield (src id, dst id, weight) sorted by (src, dst)."""
        for i, nbrs in enumerate(self.out_adj):
            for j in sorted(nbrs):
                yield self.nodes[i], self.nodes[j], nbrs[j]

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.out_adj)

    @property
    def total_weight(self) -> int:
        return sum(sum(a.values()) for a in self.out_adj)

    def out_degree(self, node: int) -> int:
        return len(self.out_adj[self.index[node]])

    def in_degree(self, node: int) -> int:
        return len(self.in_adj[self.index[node]])

    def subgraph(self, keep: Iterable[int]) -> "ForwardGraph":
        keep = set(keep)
        missing = keep.difference(self.index)
        if missing:
            raise KeyError(f"nodes not in graph: {sorted(missing)[:5]}")
        return ForwardGraph.from_edges(keep, ((u, v, w) for u, v, w in self.edges() if u in keep and v in keep))


def build_forward_graph(dataset: Dataset) -> ForwardGraph:
    """Aggregate forwards into weighted edges.

    Forwards whose origin is unknown or outside the dataset are counted in
    ``external_forwards``; forwards from the channel itself in ``self_forwards``.
    """
    external = 0
    edges: dict[tuple[int, int], int] = {}
    for cid, msgs in dataset.messages.items():
        for m in msgs:
            if m.fwd is None:
                continue
            src = m.fwd.from_channel_id
            if src is None or src not in dataset.channels:
                external += 1
                continue
            edges[(cid, src)] = edges.get((cid, src), 0) + 1
    g = ForwardGraph.from_edges(dataset.channels, ((u, v, w) for (u, v), w in edges.items()))
    g.external_forwards = external
    return g


@dataclass
class Condensation:
    component: np.ndarray          # SCC id per node index
    sizes: np.ndarray              # size per SCC id
    dag: dict[int, dict[int, int]]  # aggregated inter-SCC edges
    isolated: int                  # singleton SCCs with zero total degree

    @property
    def n_components(self) -> int:
        return int(self.sizes.size)

    @property
    def largest(self) -> int:
        return int(self.sizes.max()) if self.sizes.size else 0

    @property
    def multi_node(self) -> int:
        return int((self.sizes >= 2).sum())

    def members(self) -> list[list[int]]:
        groups: list[list[int]] = [[] for _ in range(self.n_components)]
        for i, c in enumerate(self.component):
            groups[c].append(i)
        return groups


def strongly_connected_components(g: ForwardGraph) -> Condensation:
    """Iterative Tarjan. SCC ids are dense and ordered by smallest member index."""
    n = len(g)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comp = [-1] * n
    counter = 0
    n_comp = 0
    succ = [sorted(a) for a in g.out_adj]
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            nbrs = succ[v]
            if pos < len(nbrs):
                work[-1] = (v, pos + 1)
                w = nbrs[pos]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = n_comp
                    if w == v:
                        break
                n_comp += 1

    # relabel by smallest member so ids do not depend on traversal details
    first: dict[int, int] = {}
    for i, c in enumerate(comp):
        first.setdefault(c, len(first))
    component = np.array([first[c] for c in comp], dtype=np.int64)
    sizes = np.bincount(component, minlength=n_comp) if n else np.zeros(0, dtype=np.int64)
    dag: dict[int, dict[int, int]] = {c: {} for c in range(n_comp)}
    isolated = 0
    for i in range(n):
        ci = component[i]
        for j, w in g.out_adj[i].items():
            cj = component[j]
            if ci != cj:
                dag[ci][cj] = dag[ci].get(cj, 0) + w
        if not g.out_adj[i] and not g.in_adj[i]:
            isolated += 1
    return Condensation(component, sizes, dag, isolated)


def is_acyclic(dag: dict[int, dict[int, int]]) -> bool:
    indeg = {v: 0 for v in dag}
    for v, nbrs in dag.items():
        for w in nbrs:
            indeg[w] = indeg.get(w, 0) + 1
    queue = deque(v for v, d in indeg.items() if d == 0)
    seen = 0
    while queue:
        v = queue.popleft()
        seen += 1
        for w in dag.get(v, ()):
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return seen == len(indeg)


def bfs_hops(g: ForwardGraph, source: int) -> dict[int, int]:
    """Hop count from ``source`` (channel id) to every reachable channel id."""
    start = g.index[source]
    dist = {start: 0}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        d = dist[v] + 1
        for w in g.out_adj[v]:
            if w not in dist:
                dist[w] = d
                queue.append(w)
    return {g.nodes[i]: d for i, d in dist.items()}


def hop_distances(
    g: ForwardGraph, sources: Iterable[int], targets: Iterable[int]
) -> dict[int, dict[int, Optional[int]]]:
    """Unweighted directed distances; ``None`` marks an unreachable target."""
    targets = list(targets)
    missing = [t for t in targets if t not in g.index]
    if missing:
        raise KeyError(f"unknown target nodes: {missing[:5]}")
    out = {}
    for s in sources:
        reach = bfs_hops(g, s)
        out[s] = {t: reach.get(t) for t in targets}
    return out


def pagerank(
    g: ForwardGraph, damping: float = 0.85, tol: float = 1e-9, max_iter: int = 200
) -> dict[int, float]:
    """Power iteration over the unweighted link structure.

    Dangling nodes spread their mass uniformly. Raises :class:`ConvergenceError`
    if the L1 change is still >= ``tol`` after ``max_iter`` sweeps.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must lie in (0, 1)")
    n = len(g)
    if n == 0:
        return {}
    src = np.fromiter((i for i, a in enumerate(g.out_adj) for _ in a), dtype=np.int64)
    dst = np.fromiter((j for a in g.out_adj for j in a), dtype=np.int64)
    outdeg = np.array([len(a) for a in g.out_adj], dtype=float)
    dangling = outdeg == 0
    share = np.zeros(n)
    share[~dangling] = 1.0 / outdeg[~dangling]
    rank = np.full(n, 1.0 / n)
    delta = np.inf
    for it in range(1, max_iter + 1):
        flow = np.bincount(dst, weights=(rank * share)[src], minlength=n)
        new = damping * (flow + rank[dangling].sum() / n) + (1.0 - damping) / n
        new /= new.sum()
        delta = float(np.abs(new - rank).sum())
        rank = new
        if delta < tol:
            return {node: float(r) for node, r in zip(g.nodes, rank)}
    raise ConvergenceError(max_iter, delta)


@dataclass
class DegreeExtremes:
    max_out_node: int
    max_out_degree: int
    max_in_node: int
    max_in_degree: int


def degree_extremes(g: ForwardGraph) -> DegreeExtremes:
    """Largest distinct-neighbour out/in degree; ties go to the smallest channel id."""
    if len(g) == 0:
        raise ValueError("empty graph")
    outs = [len(a) for a in g.out_adj]
    ins = [len(a) for a in g.in_adj]
    # nodes are sorted, so the first maximum is the smallest id
    io = max(range(len(g)), key=lambda i: (outs[i], -i))
    ii = max(range(len(g)), key=lambda i: (ins[i], -i))
    return DegreeExtremes(g.nodes[io], outs[io], g.nodes[ii], ins[ii])
