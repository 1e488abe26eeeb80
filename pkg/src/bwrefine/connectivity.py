"""Graphs, GF(2) rank, cut-rank and border size, and axiom checks."""
from dataclasses import dataclass
from itertools import combinations

from .decomposition import popcount
from .errors import InvalidGraph, RefusedExhaustiveCheck


@dataclass
class BitMatrix:
    rows: list
    ncols: int


def gf2_rank(m):
    """Rank over GF(2); accepts a BitMatrix or a list of int rows."""
    rows = m.rows if isinstance(m, BitMatrix) else m
    basis = {}  # leading bit -> row
    rank = 0
    for row in rows:
        while row:
            lead = row.bit_length() - 1
            b = basis.get(lead)
            if b is None:
                basis[lead] = row
                rank += 1
                break
            row ^= b
    return rank


class Graph:
    """Simple undirected graph on vertices 0..n-1 with bitset adjacency."""

    def __init__(self, n, edges=(), labels=None):
        self.n = n
        self.adj = [0] * n
        self.edges = []
        self.labels = list(labels) if labels is not None else [str(i + 1) for i in range(n)]
        for a, b in edges:
            self.add_edge(a, b)

    def add_edge(self, a, b):
        if a == b:
            raise InvalidGraph(f"self-loop at {self.labels[a]}")
        if self.adj[a] >> b & 1:
            raise InvalidGraph(f"duplicate edge {self.labels[a]}-{self.labels[b]}")
        self.adj[a] |= 1 << b
        self.adj[b] |= 1 << a
        self.edges.append((a, b))

    @property
    def full(self):
        return (1 << self.n) - 1

    def degree(self, v):
        return popcount(self.adj[v])

    def induced_prefix(self, m):
        """Subgraph induced on vertices 0..m-1."""
        return Graph(m, [(a, b) for a, b in self.edges if a < m and b < m], self.labels[:m])

    def edge_label(self, i):
        a, b = self.edges[i]
        return f"{self.labels[a]}-{self.labels[b]}"

    def __repr__(self):
        return f"Graph(n={self.n}, m={len(self.edges)})"


def cutrank(g, A):
    comp = g.full & ~A
    rows = []
    x = A
    while x:
        low = x & -x
        rows.append(g.adj[low.bit_length() - 1] & comp)
        x ^= low
    return gf2_rank(rows)


def edge_vertex_mask(g, X):
    m = 0
    for i, (a, b) in enumerate(g.edges):
        if X >> i & 1:
            m |= (1 << a) | (1 << b)
    return m


def border(g, X):
    """Vertex mask of δ(X) for an edge-index mask X."""
    full = (1 << len(g.edges)) - 1
    return edge_vertex_mask(g, X) & edge_vertex_mask(g, full & ~X)


def border_size(g, X):
    return popcount(border(g, X))


class CutRank:
    """Connectivity oracle cutrk_G over the vertex set, memoized."""

    def __init__(self, g):
        self.g = g
        self.n = g.n
        self._memo = {}

    def __call__(self, S):
        r = self._memo.get(S)
        if r is None:
            r = self._memo[S] = cutrank(self.g, S)
        return r


class BorderSize:
    """Connectivity oracle |δ| over the edge set, memoized."""

    def __init__(self, g):
        self.g = g
        self.n = len(g.edges)
        self._emask = [(1 << a) | (1 << b) for a, b in g.edges]
        self._memo = {}

    def __call__(self, X):
        r = self._memo.get(X)
        if r is None:
            inside = outside = 0
            for i, m in enumerate(self._emask):
                if X >> i & 1:
                    inside |= m
                else:
                    outside |= m
            r = self._memo[X] = popcount(inside & outside)
        return r


def verify_connectivity_axioms(f, max_n=8):
    """Exhaustive check of f(∅)=0, symmetry and submodularity.

    Returns a list of violations as (kind, U, W) tuples; empty means f passes.
    """
    n = f.n
    if n > max_n:
        raise RefusedExhaustiveCheck(f"ground set of size {n} exceeds {max_n}")
    full = (1 << n) - 1
    bad = []
    vals = [f(S) for S in range(full + 1)]
    if vals[0] != 0:
        bad.append(("empty", 0, 0))
    for S in range(full + 1):
        if vals[S] < 0:
            bad.append(("negative", S, S))
        if vals[S] != vals[full ^ S]:
            bad.append(("symmetry", S, full ^ S))
    for U in range(full + 1):
        for W in range(full + 1):
            if vals[U | W] + vals[U & W] > vals[U] + vals[W]:
                bad.append(("submodularity", U, W))
    return bad


def all_graphs(n):
    """All labeled simple graphs on n vertices."""
    pairs = list(combinations(range(n), 2))
    for m in range(1 << len(pairs)):
        yield Graph(n, [p for i, p in enumerate(pairs) if m >> i & 1])


def is_connected(g):
    if g.n == 0:
        return False
    seen = 1
    frontier = 1
    while frontier:
        nxt = 0
        for v in range(g.n):
            if frontier >> v & 1:
                nxt |= g.adj[v]
        frontier = nxt & ~seen
        seen |= nxt
    return seen == g.full
