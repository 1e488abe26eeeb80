import random
from functools import lru_cache

import networkx as nx
import pytest

from bwrefine.connectivity import Graph

# acceptance criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")


@lru_cache(maxsize=None)
def atlas_connected(max_nodes=7):
    """Connected graphs up to isomorphism with at most max_nodes vertices."""
    out = []
    for G in nx.graph_atlas_g()[1:]:
        if G.number_of_nodes() <= max_nodes and nx.is_connected(G):
            out.append(Graph(G.number_of_nodes(), sorted(G.edges())))
    return tuple(out)


def connected_graphs(max_vertices=None, min_edges=0, max_edges=None):
    out = []
    for g in atlas_connected(7):
        m = len(g.edges)
        if max_vertices is not None and g.n > max_vertices:
            continue
        if m < min_edges or (max_edges is not None and m > max_edges):
            continue
        out.append(g)
    return out


def named(name):
    n, edges = NAMED[name]
    return Graph(n, edges)


NAMED = {
    "P3": (3, [(0, 1), (1, 2)]),
    "P4": (4, [(0, 1), (1, 2), (2, 3)]),
    "K3": (3, [(0, 1), (1, 2), (0, 2)]),
    "K4": (4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    "C5": (5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]),
    "star3": (4, [(0, 1), (0, 2), (0, 3)]),
}


def complete(n):
    return Graph(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def grid(rows, cols):
    """rows x cols grid, vertices numbered row-major."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, edges)


def random_graph(rng, n, m):
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    return Graph(n, sorted(rng.sample(pairs, min(m, len(pairs)))))


@pytest.fixture
def rng():
    return random.Random(12345)


@lru_cache(maxsize=None)
def graphs_by_edges(max_edges, connected=True):
    """Graphs without isolated vertices, up to isomorphism, with 1..max_edges edges.

    Every such graph with m edges arises from one with m - 1 edges by adding an
    edge between old vertices, a pendant edge, or (if disconnected graphs are
    wanted) a separate edge. Returns {m: tuple of Graph}.
    """
    levels = {1: [nx.Graph([(0, 1)])]}
    for m in range(2, max_edges + 1):
        seen = {}
        out = []
        for G in levels[m - 1]:
            n = G.number_of_nodes()
            cands = [(a, b) for a in range(n) for b in range(a + 1, n) if not G.has_edge(a, b)]
            cands += [(a, n) for a in range(n)]
            if not connected:
                cands.append((n, n + 1))
            for a, b in cands:
                H = G.copy()
                H.add_edge(a, b)
                key = nx.weisfeiler_lehman_graph_hash(H, iterations=3)
                bucket = seen.setdefault(key, [])
                if any(nx.is_isomorphic(H, K) for K in bucket):
                    continue
                bucket.append(H)
                out.append(H)
        levels[m] = out
    return {m: tuple(Graph(G.number_of_nodes(), sorted(G.edges())) for G in gs)
            for m, gs in levels.items()}


def grow_bounded_rankwidth(rng, n, from_c5):
    """Random graph on n vertices built from an edge or C5 by pendant, true-twin
    and false-twin additions; none of these raises rankwidth above max(rw, 1),
    so the result has rankwidth at most 1 (edge start) or exactly 2 (C5 start).
    Vertex ids follow insertion order.
    """
    if from_c5:
        adj = {i: {(i + 1) % 5, (i - 1) % 5} for i in range(5)}
    else:
        adj = {0: {1}, 1: {0}}
    while len(adj) < n:
        v = rng.randrange(len(adj))
        new = len(adj)
        op = rng.randrange(3)
        if op == 0:
            nb = {v}
        elif op == 1:
            nb = adj[v] | {v}
        else:
            nb = set(adj[v])
        adj[new] = set(nb)
        for x in nb:
            adj[x].add(new)
    return Graph(n, sorted((a, b) for a in adj for b in adj[a] if a < b))
