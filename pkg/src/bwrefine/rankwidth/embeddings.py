"""Embeddings of bipartite cut graphs into R_k and their representatives.

An embedding into R_k is a tuple of 2·2^k vertex masks: entry X is the image
of a_X and entry 2^k + Y the image of b_Y (X, Y are subsets of {1..k} as
bitmasks). Representatives use the same encoding with masks over the
representative vertices of the cut side.
"""
from collections import namedtuple
from functools import lru_cache
from itertools import product

from ..connectivity import gf2_rank
from ..decomposition import bits
from ..errors import ShapeMismatch

PARITY = [bin(i).count("1") & 1 for i in range(256)]


def rk_adjacent(X, Y):
    return PARITY[X & Y] if X & Y < 256 else bin(X & Y).count("1") & 1


class RkGraph:
    """Bipartite graph with a_X ~ b_Y iff |X ∩ Y| is odd."""

    def __init__(self, k):
        self.k = k
        self.size = 1 << k

    def a_vertices(self):
        return range(self.size)

    def b_vertices(self):
        return range(self.size)

    def adjacent(self, X, Y):
        return rk_adjacent(X, Y) == 1


def is_embedding(g, A, B, k, f):
    """f is an embedding of G[A, B] into R_k."""
    K = 1 << k
    if len(f) != 2 * K:
        return False
    seen = 0
    for m in f:
        if m & seen:
            return False
        seen |= m
    if seen != A | B:
        return False
    if any(f[X] & ~A for X in range(K)) or any(f[K + Y] & ~B for Y in range(K)):
        return False
    return _one_sided(g.adj, f, f, K)


def _one_sided(adj, ga, gb, K):
    """Edge rule between the A side of ga and the B side of gb."""
    for X in range(K):
        m = ga[X]
        if not m:
            continue
        p1 = p0 = 0
        for Y in range(K):
            b = gb[K + Y]
            if b:
                if rk_adjacent(X, Y):
                    p1 |= b
                else:
                    p0 |= b
        if not (p1 | p0):
            continue
        while m:
            low = m & -m
            a = adj[low.bit_length() - 1]
            if a & p1 != p1 or a & p0:
                return False
            m ^= low
    return True


class CompatCache:
    """Two-sided compatibility via per-embedding bit profiles.

    For an embedding f into R_k (K = 2^k) the profile is (SA, LA): SA has bit
    a·K + X for every vertex a imaged to a_X, and LA has bit a·K + X when
    vertex a may sit at a_X against f's B side, i.e. N(a) ∩ B(f) equals the
    union of the b_Y images adjacent to a_X. Then _one_sided(s, t) holds iff
    SA(s) ⊆ LA(t), so compatibility is two mask tests.
    """

    def __init__(self, adj):
        self.adj = adj
        self.n = len(adj)
        self.memo = {}

    def profile(self, f, K, universe=None):
        """universe limits the vertices a for which LA is filled in."""
        key = (f, K, universe)
        p = self.memo.get(key)
        if p is not None:
            return p
        B = 0
        P1 = [0] * K
        for Y in range(K):
            b = f[K + Y]
            if b:
                B |= b
                for X in range(K):
                    if rk_adjacent(X, Y):
                        P1[X] |= b
        if B:
            allowed = {}
            for X in range(K):
                allowed[P1[X]] = allowed.get(P1[X], 0) | (1 << X)
            LA = 0
            adj = self.adj
            for a in (range(self.n) if universe is None else bits(universe)):
                m = allowed.get(adj[a] & B)
                if m:
                    LA |= m << (a * K)
        else:
            LA = (1 << (self.n * K)) - 1
        SA = 0
        for X in range(K):
            for a in bits(f[X]):
                SA |= 1 << (a * K + X)
        p = self.memo[key] = (SA, LA)
        return p

    def compatible(self, s, t, K):
        ps = self.profile(s, K)
        pt = self.profile(t, K)
        return not (ps[0] & ~pt[1]) and not (pt[0] & ~ps[1])


def emb_compatible(g, gx, gy, k):
    """Two-sided edge test between representatives over disjoint sets."""
    if len(gx) != len(gy):
        raise ShapeMismatch("embeddings into different R_k")
    K = 1 << k
    return _one_sided(g.adj, gx, gy, K) and _one_sided(g.adj, gy, gx, K)


def emb_compose(gx, gy, remap):
    """Composition: images are unioned and mapped through remap (mask -> mask)."""
    return tuple(remap(a | b) for a, b in zip(gx, gy))


def represent(f, remap):
    return tuple(remap(m) for m in f)


def make_remap(g, R, Q):
    """mask -> mask of rep vertices of R (w.r.t. Q) covering the given vertices."""
    table = {g.adj[u] & Q: 1 << u for u in bits(R)}
    adj = g.adj
    cache = {0: 0}

    def remap(m):
        r = cache.get(m)
        if r is None:
            r = 0
            x = m
            while x:
                low = x & -x
                r |= table[adj[low.bit_length() - 1] & Q]
                x ^= low
            cache[m] = r
        return r

    return remap


def all_embeddings(g, A, B, k):
    """Brute-force list of every embedding of G[A, B] into R_k (small inputs)."""
    K = 1 << k
    va, vb = bits(A), bits(B)
    out = []
    for choice in product(range(K), repeat=len(va) + len(vb)):
        f = [0] * (2 * K)
        for x, X in zip(va, choice):
            f[X] |= 1 << x
        for y, Y in zip(vb, choice[len(va):]):
            f[K + Y] |= 1 << y
        f = tuple(f)
        if _one_sided(g.adj, f, f, K):
            out.append(f)
    return out


# -- GL(l, 2) symmetry ------------------------------------------------------------

def _apply_matrix(cols, x):
    r = 0
    for i, c in enumerate(cols):
        if x >> i & 1:
            r ^= c
    return r


@lru_cache(maxsize=None)
def gl_perms(l):
    """Pairs (perm_a, perm_b) of vertex permutations of R_l preserving adjacency,
    one per invertible matrix M: a_X -> a_{MX}, b_Y -> b_{M^-T Y}.
    """
    K = 1 << l
    out = []
    for cols in product(range(K), repeat=l):
        if gf2_rank(list(cols)) != l:
            continue
        pa = [_apply_matrix(cols, X) for X in range(K)]
        pb = []
        for Y in range(K):
            for Z in range(K):
                if all(rk_adjacent(pa[X], Z) == rk_adjacent(X, Y) for X in range(K)):
                    pb.append(Z)
                    break
        out.append((tuple(pa), tuple(pb)))
    out.sort()
    return tuple(out)


def apply_gl(sigma, f):
    pa, pb = sigma
    K = len(pa)
    out = [0] * (2 * K)
    for X in range(K):
        out[pa[X]] = f[X]
        out[K + pb[X]] = f[K + X]
    return tuple(out)


def canonical(f, l):
    return min(apply_gl(s, f) for s in gl_perms(l))


def orbit(f, l):
    return sorted({apply_gl(s, f) for s in gl_perms(l)})


# -- improvement embeddings -------------------------------------------------------

ImprovementEmbeddingRep = namedtuple("ImprovementEmbeddingRep", "C W shape")
ImprovementEmbeddingRep.__doc__ = """Three C-embeddings into R_{k_i}, three W-embeddings into R_l,
and the shape (k1, k2, k3, l)."""


def _check_shape(e1, e2):
    if e1.shape != e2.shape:
        raise ShapeMismatch(f"shapes {e1.shape} and {e2.shape} differ")


def ie_c_compatible(g, e1, e2):
    _check_shape(e1, e2)
    return all(emb_compatible(g, a, b, e1.shape[i]) for i, (a, b) in enumerate(zip(e1.C, e2.C)))


def ie_compatible(g, e1, e2):
    l = e1.shape[3]
    return ie_c_compatible(g, e1, e2) and all(
        emb_compatible(g, a, b, l) for a, b in zip(e1.W, e2.W))


def ie_compose(e1, e2, remap):
    _check_shape(e1, e2)
    return ImprovementEmbeddingRep(
        tuple(emb_compose(a, b, remap) for a, b in zip(e1.C, e2.C)),
        tuple(emb_compose(a, b, remap) for a, b in zip(e1.W, e2.W)),
        e1.shape)


def c_empty(e, i):
    """Part i has no vertex on the A side of its C-embedding."""
    K = 1 << e.shape[i]
    return not any(e.C[i][:K])


def w_extendable(g, f, l, far):
    """Can the far-side representative be added entirely on the B side of R_l
    so that the result stays consistent with f's A side?
    """
    K = 1 << l
    adj = g.adj
    for r in bits(far):
        need = []
        for X in range(K):
            m = f[X]
            if not m:
                continue
            hit = adj[r] & m
            if hit == m:
                need.append((X, 1))
            elif hit == 0:
                need.append((X, 0))
            else:
                return False
        if not any(all(rk_adjacent(X, Y) == p for X, p in need) for Y in range(K)):
            return False
    return True


def root_compatible(g, ew, ewb, far_w, far_wb):
    """C-compatible, and every W-embedding extends over the far side.

    far_w is the representative of the complement of ew's side (and so on).
    """
    if not ie_c_compatible(g, ew, ewb):
        return False
    l = ew.shape[3]
    return (all(w_extendable(g, f, l, far_w) for f in ew.W)
            and all(w_extendable(g, f, l, far_wb) for f in ewb.W))


def concrete_union(c1, c2):
    """First-nonempty union of concrete representatives (-1 marks empty)."""
    return tuple(a if a >= 0 else b for a, b in zip(c1, c2))
