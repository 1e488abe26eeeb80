"""Brute-force ground truth: exact widths and exhaustive improvement search."""
from dataclasses import dataclass
from itertools import product

from .decomposition import DecompositionTree, intersects, side_masks, subtree_masks
from .errors import InternalInvariantFailure, RefusedEnumeration

MAX_ENUM_LEAVES = 9
MAX_TRIPARTITION_N = 12


@dataclass
class ImprovementDescriptor:
    tripartition: tuple  # three element masks
    width: int
    arity: int
    sum_width: int
    intersect_count: int = None

    def key(self):
        return (self.width, self.arity, self.sum_width, self.intersect_count)


def _edge_lists(n):
    """Yield edge lists of all leaf-labeled cubic trees on leaves 0..n-1.

    Leaves are nodes 0..n-1, internal nodes are numbered from n. The yielded
    list is reused between iterations.
    """
    if n == 2:
        yield [(0, 1)]
        return
    edges = [(0, n), (1, n), (2, n)]
    nxt = [n + 1]

    def rec(i):
        if i == n:
            yield edges
            return
        for j in range(len(edges)):
            a, b = edges[j]
            x = nxt[0]
            nxt[0] += 1
            edges[j] = (a, x)
            edges.append((x, b))
            edges.append((x, i))
            yield from rec(i + 1)
            edges.pop()
            edges.pop()
            edges[j] = (a, b)
            nxt[0] -= 1

    yield from rec(3)


def _tree_from_edges(n, edges):
    t = DecompositionTree()
    n_nodes = max(max(e) for e in edges) + 1
    for _ in range(n_nodes):
        t.new_node()
    for a, b in edges:
        t.add_edge(a, b)
    for e in range(n):
        t.set_leaf(e, e)
    return t


def _check_range(n):
    if not 2 <= n <= MAX_ENUM_LEAVES:
        raise RefusedEnumeration(f"enumeration supports 2..{MAX_ENUM_LEAVES} leaves, got {n}")


def enumerate_decompositions(n):
    """Every leaf-labeled cubic tree on n leaves exactly once."""
    _check_range(n)
    for edges in _edge_lists(n):
        yield _tree_from_edges(n, edges)


def _cut_masks(n, edges):
    """Leaf mask on the b-side of each edge (a, b)."""
    nbr = {}
    for a, b in edges:
        nbr.setdefault(a, []).append(b)
        nbr.setdefault(b, []).append(a)
    # root at leaf 0, compute subtree masks
    order = [0]
    parent = {0: None}
    for x in order:
        for y in nbr[x]:
            if y != parent[x]:
                parent[y] = x
                order.append(y)
    mask = {}
    for x in reversed(order):
        m = 1 << x if x < n else 0
        for y in nbr[x]:
            if y != parent[x]:
                m |= mask[y]
        mask[x] = m
    return [mask[y] for y in order[1:]]


def exact_width(f):
    """Minimum width over all decompositions of f's ground set, with a witness."""
    n = f.n
    _check_range(n)
    best = None
    best_edges = None
    for edges in _edge_lists(n):
        w = 0
        for m in _cut_masks(n, edges):
            w = max(w, f(m))
            if best is not None and w >= best:
                break
        if best is None or w < best:
            best = w
            best_edges = list(edges)
    return best, _tree_from_edges(n, best_edges)


def _tripartitions(n):
    """All tripartitions in lexicographic order of their part strings."""
    if n > MAX_TRIPARTITION_N:
        raise RefusedEnumeration(f"tripartition search supports up to {MAX_TRIPARTITION_N} elements")
    for parts in product(range(3), repeat=n):
        c = [0, 0, 0]
        for e, p in enumerate(parts):
            c[p] |= 1 << e
        yield tuple(c)


def improvement_stats(f, W, c):
    """(width, arity, sum_width) if c is a W-improvement, else None."""
    full = (1 << f.n) - 1
    fw = f(W)
    Wb = full ^ W
    width = total = arity = 0
    for ci in c:
        if not ci:
            continue
        x = f(ci)
        if 2 * x >= fw or f(ci & W) >= fw or f(ci & Wb) >= fw:
            return None
        arity += 1
        width = max(width, x)
        total += x
    if arity < 2:
        return None
    return width, arity, total


def minimum_improvements(f, W):
    """All minimum W-improvements (criteria width, arity, sum) in canonical order."""
    best = None
    out = []
    if f(W) == 0:
        return out
    for c in _tripartitions(f.n):
        s = improvement_stats(f, W, c)
        if s is None:
            continue
        if best is None or s < best:
            best, out = s, [c]
        elif s == best:
            out.append(c)
    return out


def brute_force_improvement(f, W):
    mins = minimum_improvements(f, W)
    if not mins:
        return None
    c = mins[0]
    return ImprovementDescriptor(c, *improvement_stats(f, W, c))


def count_intersected(masks, c):
    return sum(1 for m in masks.values() if intersects(m, c) >= 2)


def brute_force_global_improvement(f, T, r, mins=None):
    """Minimum W-improvement (W = T_r[u]) intersecting fewest nodes."""
    u, v = r
    masks = subtree_masks(T, r)
    if mins is None:
        mins = minimum_improvements(f, masks[u])
    best = None
    for c in mins:
        cnt = count_intersected(masks, c)
        if best is None or cnt < best[0]:
            best = (cnt, c)
    if best is None:
        return None
    c = best[1]
    return ImprovementDescriptor(c, *improvement_stats(f, masks[u], c), intersect_count=best[0])


def check_global_improvement(f, T, r, c):
    """Node-wise bound f(T_r[w] ∩ C_i) ≤ f(T_r[w]) with strictness off pure nodes."""
    masks = subtree_masks(T, r)
    for w, m in masks.items():
        fm = f(m)
        for ci in c:
            x = m & ci
            if not x:
                continue
            fx = f(x)
            if fx > fm or (fx == fm and x != m):
                raise InternalInvariantFailure(
                    f"global improvement bound fails at node {w}: {fx} vs {fm}")


def heavy_count(T, f, k):
    sides = side_masks(T)
    return sum(1 for a, b in T.edges() if f(sides[(a, b)]) >= k)
