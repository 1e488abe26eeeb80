"""Minimal representatives of cuts and augmented rank decompositions."""
from dataclasses import dataclass

from ..connectivity import Graph, cutrank, gf2_rank
from ..decomposition import (DecompositionTree, bits, popcount, rooted_order, side_masks)
from ..errors import InternalInvariantFailure, InvalidRepresentative, NoDecomposition


@dataclass(frozen=True)
class MinimalRepresentative:
    R: int  # vertex mask on the A side
    Q: int  # vertex mask on the complement side


def minimal_representative(g, R, Q):
    """Shrink a representative (R, Q) of a cut to one vertex per twin class.

    Twins on the R side are told apart by their neighbours in Q and vice
    versa; the lowest vertex id of each class is kept.
    """
    adj = g.adj
    seen = set()
    newR = 0
    for x in bits(R):
        key = adj[x] & Q
        if key not in seen:
            seen.add(key)
            newR |= 1 << x
    seen = set()
    newQ = 0
    for y in bits(Q):
        key = adj[y] & R
        if key not in seen:
            seen.add(key)
            newQ |= 1 << y
    return MinimalRepresentative(newR, newQ)


def rep_of_vertex(g, v, mr):
    key = g.adj[v] & mr.Q
    for u in bits(mr.R):
        if g.adj[u] & mr.Q == key:
            return u
    raise InvalidRepresentative(f"vertex {v} has no twin in the representative")


def rep_map(g, R, Q):
    """Map neighbourhood-in-Q keys to the rep vertex bit, for fast rep lookups."""
    return {g.adj[u] & Q: 1 << u for u in bits(R)}


def is_minimal_representative(g, A, R):
    """R picks exactly one vertex from every twin class of A."""
    if R & ~A:
        return False
    comp = g.full & ~A
    classes = {}
    for x in bits(A):
        classes.setdefault(g.adj[x] & comp, []).append(x)
    for members in classes.values():
        if sum(1 for x in members if R >> x & 1) != 1:
            return False
    return True


def rep_rank(g, R, Q):
    return gf2_rank([g.adj[x] & Q for x in bits(R)])


class AugmentedRankDecomposition:
    """A rank decomposition whose directed edges (a, b) store the minimal
    representative of the leaf set on a's side.
    """

    def __init__(self, g, tree, reps=None):
        self.g = g
        self.tree = tree
        self.reps = {} if reps is None else reps

    @classmethod
    def from_scratch(cls, g, tree):
        aug = cls(g, tree)
        full = g.full
        for (a, b), side in side_masks(tree).items():
            mr = minimal_representative(g, side, full & ~side)
            aug.reps[(a, b)] = mr.R
        return aug

    def edge_width(self, a, b):
        return rep_rank(self.g, self.reps[(a, b)], self.reps[(b, a)])

    def width(self):
        return max(self.edge_width(a, b) for a, b in self.tree.edges())

    def verify(self):
        """Every stored rep is minimal, small, and reproduces the cut-rank."""
        g = self.g
        sides = side_masks(self.tree)
        if set(sides) != set(self.reps):
            raise InternalInvariantFailure("stored representatives do not match tree edges")
        for (a, b), side in sides.items():
            R = self.reps[(a, b)]
            if not is_minimal_representative(g, side, R):
                raise InternalInvariantFailure(f"rep of ({a},{b}) is not minimal")
            w = cutrank(g, side)
            if popcount(R) > 2 ** w:
                raise InternalInvariantFailure(f"rep of ({a},{b}) larger than 2^{w}")
            if self.edge_width(a, b) != w:
                raise InternalInvariantFailure(f"rep rank of ({a},{b}) differs from cut-rank")

    def copy(self):
        return AugmentedRankDecomposition(self.g, self.tree.copy(), dict(self.reps))


def base_decomposition(g):
    """Augmented decomposition of a graph on exactly two vertices."""
    if g.n != 2:
        raise NoDecomposition("base case needs exactly two vertices")
    t = DecompositionTree()
    a, b = t.add_leaf(0), t.add_leaf(1)
    t.add_edge(a, b)
    return AugmentedRankDecomposition.from_scratch(g, t)


def add_vertex(aug, g2, v):
    """Insert vertex v (the last vertex of g2) into an augmented decomposition
    of g2 - v; representatives are re-minimized by one pass rooted at v.
    """
    if g2.n < 3 or v != g2.n - 1:
        raise NoDecomposition("add_vertex expects the new last vertex of a graph on ≥ 3 vertices")
    T = aug.tree
    old = aug.reps
    nbrs = bits(g2.adj[v] & ((1 << v) - 1))
    anchor = nbrs[0] if nbrs else 0
    leaf = T.leaf[anchor]
    q = T.adj[leaf][0]
    s = T.new_node()
    lv = T.add_leaf(v)
    T.remove_edge(leaf, q)
    T.add_edge(leaf, s)
    T.add_edge(s, q)
    T.add_edge(s, lv)

    def old_complement(x, p):
        if (x, p) == (leaf, s):
            return old[(q, leaf)]
        if (x, p) == (q, s):
            return old[(leaf, q)]
        return old[(p, x)]

    order, parent = rooted_order(T, (s, lv))
    vbit = 1 << v
    new = {}
    low = {}
    for x in reversed(order):
        if x == lv:
            continue
        p = parent[x]
        e = T.elem.get(x)
        if e is not None:
            cand = 1 << e
        else:
            cand = 0
            for c in T.adj[x]:
                if c != p:
                    cand |= low[c]
        comp = vbit if x == s else old_complement(x, p) | vbit
        mr = minimal_representative(g2, cand, comp)
        low[x] = mr.R
        new[(x, p)] = mr.R
        new[(p, x)] = mr.Q
    return AugmentedRankDecomposition(g2, T, new)


def compress_prefixes(g, callback=None):
    """Build augmented decompositions of g[0..i) for i = 2..n by add_vertex.

    callback(i, aug) may replace the decomposition after each step.
    """
    if g.n < 2:
        raise NoDecomposition("need at least two vertices")
    aug = base_decomposition(g.induced_prefix(2))
    if callback:
        aug = callback(2, aug) or aug
    for i in range(3, g.n + 1):
        aug = add_vertex(aug, g.induced_prefix(i), i - 1)
        if callback:
            aug = callback(i, aug) or aug
    return aug


__all__ = ["MinimalRepresentative", "minimal_representative", "rep_of_vertex", "rep_map",
           "is_minimal_representative", "AugmentedRankDecomposition", "add_vertex",
           "base_decomposition", "compress_prefixes", "Graph"]
