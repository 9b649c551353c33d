"""Seeded random geometric fiber networks with convex-hull end nodes.

Seeding scheme: a graph for ``seed`` draws its points from
``Generator(PCG64(SeedSequence(seed)))`` as one ``random((n, 2))`` call, i.e.
x then y for node 0, then node 1, and so on. Attempt ``i`` of
:func:`generate_feasible` uses ``SeedSequence([*seed, i])`` instead, where an
integer seed counts as a one-element sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist, squareform

from .errors import NetworkError, PlanFailure
from .network import END, REPEATER, Fiber, FiberNetwork, Node


class DegenerateHullError(NetworkError):
    """All points collinear (or fewer than three): no 2-D hull, resample."""


def _rng(entropy) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def node_ids(n: int) -> list[str]:
    width = len(str(n - 1))
    return [f"n{i:0{width}d}" for i in range(n)]


def geometric_from_points(points: np.ndarray, radius: float) -> FiberNetwork:
    """Edge between two points iff their distance is at most ``radius``, weighted by it.

    All nodes start as end nodes; :func:`assign_end_nodes` sets the roles.
    """
    pts = np.asarray(points, float)
    n = len(pts)
    ids = node_ids(n)
    dist = squareform(pdist(pts)) if n > 1 else np.zeros((1, 1))
    iu, ju = np.triu_indices(n, k=1)
    keep = dist[iu, ju] <= radius
    fibers = tuple(Fiber(ids[i], ids[j], float(dist[i, j])) for i, j in zip(iu[keep], ju[keep]))
    nodes = tuple(Node(ids[i], END, float(x), float(y)) for i, (x, y) in enumerate(pts))
    return FiberNetwork(nodes, fibers)


def random_geometric(n: int, radius: float, seed) -> FiberNetwork:
    if n < 3:
        raise ValueError("need at least 3 nodes")
    if not 0 < radius <= math.sqrt(2) + 1e-12:
        raise ValueError("radius must lie in (0, sqrt(2)]")
    pts = _rng(seed).random((n, 2))
    return geometric_from_points(pts, radius)


def hull_vertices(points: np.ndarray) -> list[int]:
    """Indices of the strict vertices of the convex hull (qhull)."""
    pts = np.asarray(points, float)
    if len(pts) < 3:
        raise DegenerateHullError("fewer than three points")
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateHullError("points are collinear") from exc
    return sorted(int(i) for i in hull.vertices)


def assign_end_nodes(net: FiberNetwork) -> FiberNetwork:
    """Hull vertices become end nodes, every other node a potential repeater site.

    Points lying on a hull edge without being a vertex stay repeater sites.
    """
    if not net.has_coordinates():
        raise NetworkError("end-node assignment needs node coordinates")
    idx = hull_vertices(net.coordinates())
    ends = {net.nodes[i].id for i in idx}
    nodes = tuple(Node(m.id, END if m.id in ends else REPEATER, m.x, m.y) for m in net.nodes)
    return FiberNetwork(nodes, net.fibers)


def random_network(n: int, radius: float, seed) -> FiberNetwork:
    return assign_end_nodes(random_geometric(n, radius, seed))


@dataclass
class FeasibleDraw:
    network: FiberNetwork
    attempts: int
    plan: object  # DeploymentPlan of the accepted draw


class AttemptsExhausted(RuntimeError):
    pass


def generate_feasible(n, radius, seed, req, options, max_attempts: int = 100) -> FeasibleDraw:
    """Resample until the planner finds a solution for the drawn network.

    Draws whose hull degenerates or whose plan fails (infeasible, disconnected
    pair, solver limit) are discarded.
    """
    from .planner import plan

    base = [seed] if isinstance(seed, (int, np.integer)) else list(seed)
    for attempt in range(max_attempts):
        try:
            net = random_network(n, radius, [*base, attempt])
            result = plan(net, req, options)
        except (DegenerateHullError, PlanFailure):
            continue
        return FeasibleDraw(net, attempt + 1, result)
    raise AttemptsExhausted(f"no feasible network in {max_attempts} attempts (n={n}, d={radius}, seed={seed})")
