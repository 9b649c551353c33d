import itertools

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from repeater_alloc.connectivity import vertex_connectivity_graph


def brute_connectivity(vertices, edges):
    """Smallest vertex set whose removal disconnects the graph; n-1 for complete graphs."""
    n = len(vertices)
    adj = {v: set() for v in vertices}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)

    def connected(keep):
        keep = set(keep)
        if len(keep) <= 1:
            return True
        start = next(iter(keep))
        seen, stack = {start}, [start]
        while stack:
            u = stack.pop()
            for w in adj[u] & keep:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == keep

    for k in range(n - 1):
        for cut in itertools.combinations(vertices, k):
            rest = [v for v in vertices if v not in cut]
            if len(rest) >= 2 and not connected(rest):
                return k
    return n - 1


def test_complete_graph():
    v = list("abcd")
    assert vertex_connectivity_graph(v, list(itertools.combinations(v, 2))) == 3


def test_path_graph():
    assert vertex_connectivity_graph(list("abc"), [("a", "b"), ("b", "c")]) == 1


def test_disconnected_graph():
    assert vertex_connectivity_graph(list("abcd"), [("a", "b"), ("c", "d")]) == 0


def test_cycle_and_duplicate_edges():
    v = list("abcde")
    edges = [(v[i], v[(i + 1) % 5]) for i in range(5)]
    assert vertex_connectivity_graph(v, edges + [(b, a) for a, b in edges]) == 2


@given(st.integers(0, 100_000), st.integers(2, 9), st.floats(0.1, 0.95))
def test_matches_brute_force(seed, n, p):
    rng = np.random.default_rng(seed)
    v = [f"n{i}" for i in range(n)]
    edges = [(a, b) for a, b in itertools.combinations(v, 2) if rng.random() < p]
    assert vertex_connectivity_graph(v, edges) == brute_connectivity(v, edges)
