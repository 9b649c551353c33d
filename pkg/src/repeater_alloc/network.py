"""Fiber network model, shortest routes and candidate elementary links."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import jsonschema
import numpy as np

from .errors import InfeasibleError, NetworkError

END = "end"
REPEATER = "repeater"

NETWORK_SCHEMA = {
    "type": "object",
    "required": ["nodes", "fibers"],
    "properties": {
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "type"],
                "properties": {
                    "id": {"type": "string"},
                    "type": {"enum": [END, REPEATER]},
                    "x": {"type": "number"},
                    "y": {"type": "number"},
                },
            },
        },
        "fibers": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["a", "b", "length_km"],
                "properties": {
                    "a": {"type": "string"},
                    "b": {"type": "string"},
                    "length_km": {"type": "number"},
                },
            },
        },
    },
}

# relative tolerance under which two route lengths count as a tie
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    x: float | None = None
    y: float | None = None


@dataclass(frozen=True)
class Fiber:
    a: str
    b: str
    length_km: float


@dataclass(frozen=True)
class FiberNetwork:
    """Undirected weighted fiber graph with end nodes and potential repeater sites.

    Parallel fibers are collapsed to the shortest one on construction, so the
    graph is simple. Node order is the order given; most consumers sort ids.
    """

    nodes: tuple[Node, ...]
    fibers: tuple[Fiber, ...]
    _adj: dict = field(init=False, repr=False, compare=False)
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_id: dict[str, Node] = {}
        for n in self.nodes:
            if n.id in by_id:
                raise NetworkError(f"duplicate node id {n.id!r}")
            if n.kind not in (END, REPEATER):
                raise NetworkError(f"node {n.id!r}: unknown type {n.kind!r}")
            by_id[n.id] = n
        collapsed: dict[tuple[str, str], float] = {}
        for f in self.fibers:
            for end in (f.a, f.b):
                if end not in by_id:
                    raise NetworkError(f"fiber endpoint {end!r} is not a node")
            if f.a == f.b:
                raise NetworkError(f"self-loop fiber at {f.a!r}")
            if not math.isfinite(f.length_km):
                raise NetworkError(f"non-finite fiber length {f.a}-{f.b}")
            if f.length_km <= 0:
                raise NetworkError(f"nonpositive fiber length {f.a}-{f.b}: {f.length_km}")
            key = (f.a, f.b) if f.a < f.b else (f.b, f.a)
            if key not in collapsed or f.length_km < collapsed[key]:
                collapsed[key] = f.length_km
        if sum(1 for n in self.nodes if n.kind == END) < 2:
            raise NetworkError("fewer than 2 end nodes")
        fibers = tuple(Fiber(a, b, w) for (a, b), w in sorted(collapsed.items()))
        adj: dict[str, dict[str, float]] = {n.id: {} for n in self.nodes}
        for f in fibers:
            adj[f.a][f.b] = f.length_km
            adj[f.b][f.a] = f.length_km
        object.__setattr__(self, "fibers", fibers)
        object.__setattr__(self, "_adj", adj)
        object.__setattr__(self, "_by_id", by_id)

    @property
    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    @property
    def end_nodes(self) -> list[str]:
        return sorted(n.id for n in self.nodes if n.kind == END)

    @property
    def repeater_nodes(self) -> list[str]:
        return sorted(n.id for n in self.nodes if n.kind == REPEATER)

    def node(self, node_id: str) -> Node:
        return self._by_id[node_id]

    def neighbors(self, node_id: str) -> Mapping[str, float]:
        return self._adj[node_id]

    def fiber_length(self, a: str, b: str) -> float:
        return self._adj[a][b]

    def has_coordinates(self) -> bool:
        return all(n.x is not None and n.y is not None for n in self.nodes)

    def coordinates(self) -> np.ndarray:
        return np.array([[n.x, n.y] for n in self.nodes], dtype=float)

    def with_roles(self, end_ids: Iterable[str]) -> "FiberNetwork":
        """Copy with the end-node set replaced; every other node becomes a repeater site."""
        ends = set(end_ids)
        nodes = tuple(
            Node(n.id, END if n.id in ends else REPEATER, n.x, n.y) for n in self.nodes
        )
        return FiberNetwork(nodes, self.fibers)

    def to_dict(self) -> dict:
        nodes = []
        for n in self.nodes:
            d = {"id": n.id, "type": n.kind}
            if n.x is not None:
                d["x"] = n.x
            if n.y is not None:
                d["y"] = n.y
            nodes.append(d)
        fibers = [{"a": f.a, "b": f.b, "length_km": f.length_km} for f in self.fibers]
        return {"nodes": nodes, "fibers": fibers}


def load_network(document) -> FiberNetwork:
    """Parse and validate a network document.

    ``document`` may be a JSON string, a parsed dict, or a path to a file.
    """
    if isinstance(document, Path):
        document = document.read_text(encoding="utf-8")
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise NetworkError(f"invalid JSON: {exc}") from exc
    try:
        jsonschema.validate(document, NETWORK_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise NetworkError(f"schema violation: {exc.message}") from exc
    nodes = tuple(
        Node(d["id"], d["type"], d.get("x"), d.get("y")) for d in document["nodes"]
    )
    fibers = tuple(Fiber(d["a"], d["b"], float(d["length_km"])) for d in document["fibers"])
    return FiberNetwork(nodes, fibers)


@dataclass(frozen=True)
class EndNodePairSet:
    pairs: tuple[tuple[str, str], ...]
    orientation_seed: int | None

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def build_pair_set(net: FiberNetwork, seed: int = 0, canonical: bool = False) -> EndNodePairSet:
    """One ordered pair per unordered end-node pair.

    Unordered pairs are visited in sorted order; for each, one draw from a
    PCG64 stream seeded with ``seed`` decides whether it is reversed.
    ``canonical`` skips the draw and keeps node-id order.
    """
    ends = net.end_nodes
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs = []
    for i, a in enumerate(ends):
        for b in ends[i + 1:]:
            if not canonical and rng.integers(2) == 1:
                pairs.append((b, a))
            else:
                pairs.append((a, b))
    return EndNodePairSet(tuple(pairs), None if canonical else seed)


@dataclass(frozen=True)
class ShortestPaths:
    """Per-source distances and routes (node sequences, source first)."""

    dist: dict[str, dict[str, float]]
    route: dict[str, dict[str, tuple[str, ...]]]

    def distance(self, u: str, v: str) -> float:
        return self.dist[u].get(v, math.inf)


def _lex_dijkstra(net: FiberNetwork, source: str, blocked: frozenset[str]):
    # Route ties go to the lexicographically smallest node-id sequence. Prefixes
    # of such a route are themselves minimal, so the label can be propagated.
    dist = {source: 0.0}
    route = {source: (source,)}
    done = set()
    heap = [(0.0, (source,), source)]
    while heap:
        d, r, u = heapq.heappop(heap)
        if u in done or r != route[u]:
            continue
        done.add(u)
        if u in blocked and u != source:
            continue
        for v, w in net.neighbors(u).items():
            if v in done:
                continue
            nd = d + w
            old = dist.get(v, math.inf)
            tie = old < math.inf and abs(nd - old) <= _TIE_RTOL * max(1.0, old)
            nr = r + (v,)
            if (nd < old and not tie) or (tie and nr < route[v]):
                dist[v] = min(nd, old) if tie else nd
                route[v] = nr
                heapq.heappush(heap, (dist[v], nr, v))
    return dist, route


def all_pairs_shortest_paths(
    net: FiberNetwork, sources: Iterable[str] | None = None, *, end_node_transit: bool = True
) -> ShortestPaths:
    """Dijkstra from each source.

    With ``end_node_transit=False`` routes may start or end at an end node but
    never pass through one.
    """
    if sources is None:
        sources = net.node_ids
    blocked = frozenset() if end_node_transit else frozenset(net.end_nodes)
    dist, route = {}, {}
    for s in sources:
        if s not in net.node_ids:
            raise NetworkError(f"unknown source {s!r}")
        dist[s], route[s] = _lex_dijkstra(net, s, blocked)
    return ShortestPaths(dist, route)


@dataclass(frozen=True)
class CandidateLink:
    u: str
    v: str
    length_km: float
    fiber_route: tuple[tuple[str, str], ...]

    @property
    def key(self) -> tuple[str, str]:
        return (self.u, self.v)

    @property
    def route_nodes(self) -> tuple[str, ...]:
        if not self.fiber_route:
            return (self.u,)
        return (self.fiber_route[0][0],) + tuple(b for _, b in self.fiber_route)


@dataclass(frozen=True)
class CandidateLinkSet:
    """Per-pair elementary-link candidates.

    ``per_pair[q]`` lists the keys of E_q sorted by (u, v); ``links`` maps each
    key in E to its route. Routes do not depend on q, so they are shared.
    """

    pairs: EndNodePairSet
    repeaters: tuple[str, ...]
    per_pair: dict[tuple[str, str], tuple[tuple[str, str], ...]]
    links: dict[tuple[str, str], CandidateLink]

    def e_q(self, q: tuple[str, str]) -> list[CandidateLink]:
        return [self.links[k] for k in self.per_pair[q]]

    def length(self, u: str, v: str) -> float:
        return self.links[(u, v)].length_km

    def total_links(self) -> int:
        return sum(len(v) for v in self.per_pair.values())


def build_candidate_links(
    net: FiberNetwork, pairs: EndNodePairSet, *, end_node_transit: bool = True
) -> CandidateLinkSet:
    """Construct E_q for every pair, with shortest-route lengths and fibers.

    Node pairs not connected in the fiber graph get no candidate link. A pair
    (s, t) that is itself disconnected raises :class:`InfeasibleError` at
    stage ``candidate-links``.
    """
    reps = net.repeater_nodes
    sources = sorted({s for s, _ in pairs} | set(reps))
    sp = all_pairs_shortest_paths(net, sources, end_node_transit=end_node_transit)

    disconnected = [
        (s, t) for s, t in pairs if not math.isfinite(sp.distance(s, t))
    ]
    if disconnected:
        raise InfeasibleError(
            "candidate-links",
            "end-node pair disconnected in the fiber graph",
            {"pairs": [list(q) for q in disconnected]},
        )

    links: dict[tuple[str, str], CandidateLink] = {}

    def link(u, v):
        key = (u, v)
        if key not in links:
            d = sp.distance(u, v)
            if not math.isfinite(d):
                links[key] = None
            else:
                nodes = sp.route[u][v]
                links[key] = CandidateLink(u, v, d, tuple(zip(nodes[:-1], nodes[1:])))
        return links[key]

    per_pair = {}
    for s, t in pairs:
        keys = []
        for n1 in [s, *reps]:
            for n2 in [*reps, t]:
                if n1 != n2 and link(n1, n2) is not None:
                    keys.append((n1, n2))
        per_pair[(s, t)] = tuple(sorted(keys))
    links = {k: v for k, v in links.items() if v is not None}
    return CandidateLinkSet(pairs, tuple(reps), per_pair, links)
