"""Vertex connectivity of an undirected graph via node-splitting max-flow."""

from __future__ import annotations

from collections import deque
from itertools import combinations
from typing import Iterable


def _adjacency(vertices: Iterable[str], edges: Iterable[tuple[str, str]]) -> dict[str, set[str]]:
    adj = {v: set() for v in vertices}
    for u, v in edges:
        if u == v:
            continue
        adj[u].add(v)
        adj[v].add(u)
    return adj


def local_vertex_connectivity(adj: dict[str, set[str]], s: str, t: str) -> int:
    """Maximum number of internally vertex-disjoint s-t paths (s, t non-adjacent).

    Every vertex v becomes v_in -> v_out with capacity 1 (infinite for s, t);
    every edge becomes two arcs of unbounded capacity. Unit augmenting paths
    are found by BFS on the residual graph.
    """
    cap: dict[tuple, dict[tuple, int]] = {}
    big = len(adj) + 1

    def arc(a, b, c):
        cap.setdefault(a, {})
        cap.setdefault(b, {})
        cap[a][b] = cap[a].get(b, 0) + c
        cap[b].setdefault(a, 0)

    for v in adj:
        arc((v, 0), (v, 1), big if v in (s, t) else 1)
    for u in adj:
        for v in adj[u]:
            arc((u, 1), (v, 0), big)
    src, dst = (s, 1), (t, 0)
    flow = 0
    while True:
        parent = {src: None}
        dq = deque([src])
        while dq and dst not in parent:
            a = dq.popleft()
            for b, c in cap[a].items():
                if c > 0 and b not in parent:
                    parent[b] = a
                    dq.append(b)
        if dst not in parent:
            return flow
        b = dst
        while parent[b] is not None:
            a = parent[b]
            cap[a][b] -= 1
            cap[b][a] += 1
            b = a
        flow += 1


def vertex_connectivity_graph(vertices: Iterable[str], edges: Iterable[tuple[str, str]]) -> int:
    """Global vertex connectivity; complete graphs give |V| - 1, disconnected ones 0."""
    adj = _adjacency(vertices, edges)
    n = len(adj)
    if n < 2:
        raise ValueError("vertex connectivity needs at least two vertices")
    if not _connected(adj):
        return 0
    best = n - 1
    for s, t in combinations(sorted(adj), 2):
        if t in adj[s]:
            continue
        best = min(best, local_vertex_connectivity(adj, s, t))
        if best == 0:
            break
    return best


def _connected(adj) -> bool:
    start = next(iter(adj))
    seen = {start}
    dq = deque([start])
    while dq:
        for v in adj[dq.popleft()]:
            if v not in seen:
                seen.add(v)
                dq.append(v)
    return len(seen) == len(adj)
