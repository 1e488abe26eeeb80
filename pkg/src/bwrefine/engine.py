"""Iterative refinement driven by a refinement data structure.

A refinement data structure (see RefinementStructure) keeps a decomposition
rooted at an edge and answers width / improvement queries at that root.
"""
from dataclasses import dataclass

from .decomposition import (check_edit_set, cut_family, edit_set, observation_cut_family,
                            refine, side_masks, subtree_masks, width_of)
from .errors import InternalInvariantFailure
from .oracle import check_global_improvement

UNSEEN, OPEN, CLOSED = 0, 1, 2

# phi_k values stay below 2**128 for widths up to 40 on trees with up to 1e6 edges:
# 3 * 40 * 3**40 * 2e6 < 2**89.
POTENTIAL_BITS = 128


def phi_k(x, k):
    if x < k:
        return x * 3 ** x
    return 3 * x * 3 ** x


def potential_of(T, f, k):
    sides = side_masks(T)
    return sum(phi_k(f(sides[(a, b)]), k) for a, b in T.edges())


class RefinementStructure:
    """Shared plumbing for the two refinement data structures.

    Subclasses keep per-node tables oriented toward the root edge and
    implement _rebuild(x, parent), width(), can_refine(), edit_set(),
    refine(es) and check().
    """

    def __init__(self, tree, root, k):
        self.tree = tree
        self.k = k
        self.root = root
        self.tabs = {}  # node -> table computed with the given parent
        self.tab_parent = {}
        self._answer = None
        self.stats = []  # (|R|, potential drop) per checked refinement

    def _build_all(self):
        order = []
        u, v = self.root
        parent = {u: v, v: u}
        stack = [u, v]
        while stack:
            x = stack.pop()
            order.append(x)
            for y in self.tree.adj[x]:
                if y != parent[x]:
                    parent[y] = x
                    stack.append(y)
        for x in reversed(order):
            self._rebuild(x, parent[x])

    def _ensure(self, x, parent):
        if self.tab_parent.get(x) != parent:
            self._rebuild(x, parent)

    def move(self, x, y):
        """Move the root to edge xy, which must share an endpoint with the root."""
        u, v = self.root
        if y not in self.tree.adj[x] or not ({x, y} & {u, v}):
            raise InternalInvariantFailure(f"illegal move from {self.root} to {(x, y)}")
        self.root = (x, y)
        self._answer = None
        # only the shared endpoint changes its children
        self._ensure(x, y)
        self._ensure(y, x)

    def move_to(self, x, y, region):
        """Walk the root to edge xy through nodes of region (plus x, y)."""
        a, b = self.root
        if {a, b} == {x, y}:
            self.root = (x, y)
            return
        allowed = set(region) | {x, y}
        prev = {a: None, b: None}
        queue = [a, b]
        i = 0
        while i < len(queue) and x not in prev:
            z = queue[i]
            i += 1
            for w in self.tree.adj[z]:
                if w in allowed and w not in prev and w != y:
                    prev[w] = z
                    queue.append(w)
        if x not in prev:
            raise InternalInvariantFailure("resume edge not reachable through new region")
        path = [x]
        while prev[path[-1]] is not None:
            path.append(prev[path[-1]])
        path.reverse()  # starts at a or b
        for p, q in zip(path, path[1:]):
            self.move(p, q)
        self.move(x, y)

    def forget(self, nodes):
        for x in nodes:
            self.tabs.pop(x, None)
            self.tab_parent.pop(x, None)

    def output(self):
        return self.tree


@dataclass
class EngineOutcome:
    improved: bool
    width: int
    tree: object
    refinements: int = 0
    sum_r: int = 0

    def __str__(self):
        return f"improved {self.width}" if self.improved else f"conclude two-approx {self.width}"


def start_root(T):
    s = T.lowest_leaf()
    return (T.adj[s][0], s)


def _check_path(T, state, s, u, v):
    open_nodes = {x for x, st in state.items() if st == OPEN}
    prev, cur, seen = None, s, 1
    while True:
        nxt = [y for y in T.adj[cur] if y != prev and state.get(y) == OPEN]
        if len(nxt) > 1:
            raise InternalInvariantFailure("open nodes branch")
        if not nxt:
            break
        prev, cur = cur, nxt[0]
        seen += 1
    if cur != u or prev != v or seen != len(open_nodes):
        raise InternalInvariantFailure("open nodes do not form the path s..v,u")


def iterative_refinement(ds, f=None, check=False, trace=None):
    """Either improve ds.tree to width ≤ k-1 or conclude k ≤ 2·bw(f).

    ds must be rooted at (u, s) where s is the lowest leaf (see start_root).
    With check=True, f must be the connectivity oracle and every invariant is
    verified from scratch after each refinement.
    """
    T = ds.tree
    k = ds.k
    u, v = ds.root
    s = v
    if s not in T.elem:
        raise InternalInvariantFailure("engine must start at a leaf edge")
    state = {u: OPEN, v: OPEN}
    n_ref = sum_r = 0
    phi0 = potential_of(T, f, k) if check else None
    while state.get(u) == OPEN:
        if ds.root != (u, v) and ds.root != (v, u):
            raise InternalInvariantFailure("structure root out of sync")
        if check:
            _check_path(T, state, s, u, v)
        w = None
        for y in T.adj[u]:
            if state.get(y, UNSEEN) == UNSEEN and (w is None or y < w):
                w = y
        if w is not None:
            ds.move(w, u)
            v, u = u, w
            state[u] = OPEN
            continue
        if ds.width() < k:
            if v == s:
                out = EngineOutcome(True, k - 1, T, n_ref, sum_r)
                if check:
                    _check_improved(T, f, k, state, u, v, phi0, sum_r)
                if trace is not None:
                    trace.append(f"improved {k - 1}")
                return out
            state[u] = CLOSED
            u = v
            v = next(y for y in T.adj[u] if state.get(y) == OPEN)
            ds.move(u, v)
            continue
        if check and ds.width() != f(subtree_masks(T, ds.root)[ds.root[0]]):
            raise InternalInvariantFailure("structure width disagrees with oracle")
        if not ds.can_refine():
            if trace is not None:
                trace.append(f"conclude two-approx {k}")
            return EngineOutcome(False, k, T, n_ref, sum_r)
        es = ds.edit_set()
        before = _before_refine(T, f, k, ds.root, es) if check else None
        sp = ds.refine(es)
        n_ref += 1
        sum_r += len(es.R)
        for y in sp.new_nodes:
            state.pop(y, None)
        for y in es.R:
            state.pop(y, None)
        opened = [y for y in sp.reattached if state.get(y) == OPEN]
        if len(opened) != 1:
            raise InternalInvariantFailure("expected exactly one open neighbor of the edit set")
        v = opened[0]
        u = sp.reattached[v][1]
        state[u] = OPEN
        ds.move_to(u, v, sp.new_nodes)
        if check:
            _after_refine(ds, f, k, es, before)
        if trace is not None:
            wd, heavy = width_of(T, f) if f is not None else (ds.k, [])
            pot = potential_of(T, f, k) if f is not None else 0
            trace.append(f"refine {len(es.R)} {wd} {len(heavy) if wd == k else 0} {pot}")
    raise InternalInvariantFailure("engine left the open path")


def _before_refine(T, f, k, root, es):
    masks = subtree_masks(T, root)
    c = [0, 0, 0]
    for i in range(3):
        for w in es.N[i]:
            c[i] |= masks[w]
    c = tuple(c)
    check_edit_set(T, es)
    ref = edit_set(T, root, c)
    if ref.R != es.R or ref.N != es.N:
        raise InternalInvariantFailure("decoded edit set differs from direct computation")
    check_global_improvement(f, T, root, c)
    wd, heavy = width_of(T, f)
    if wd > k:
        raise InternalInvariantFailure("tree wider than k before refinement")
    return {
        "tree": T.copy(),
        "root": root,
        "c": c,
        "heavy": len(heavy) if wd == k else 0,
        "phi": potential_of(T, f, k),
        "expected_cuts": observation_cut_family(T, root, c),
    }


def _after_refine(ds, f, k, es, before):
    T = ds.tree
    T.validate()
    ds.check()
    wd, heavy = width_of(T, f)
    if wd > k:
        raise InternalInvariantFailure(f"width grew to {wd} > {k}")
    h = len(heavy) if wd == k else 0
    if h >= before["heavy"]:
        raise InternalInvariantFailure("heavy edge count did not decrease")
    phi = potential_of(T, f, k)
    if before["phi"] - phi < len(es.R):
        raise InternalInvariantFailure("potential dropped by less than |R|")
    cuts = cut_family(T)
    if cuts != before["expected_cuts"]:
        raise InternalInvariantFailure("cut family differs from the refinement formula")
    if cuts != cut_family(refine(before["tree"], before["root"], before["c"])):
        raise InternalInvariantFailure("splice differs from the direct refinement")
    if len(cuts) != len(T.edges()):
        raise InternalInvariantFailure("duplicate cuts")
    ds.stats.append((len(es.R), before["phi"] - phi))


def _check_improved(T, f, k, state, u, v, phi0, sum_r):
    for x in T.nodes():
        if x not in (u, v) and state.get(x) != CLOSED:
            raise InternalInvariantFailure(f"node {x} not closed at return")
    wd, _ = width_of(T, f)
    if wd > k - 1:
        raise InternalInvariantFailure("improved tree still has width k")
    if sum_r > phi0:
        raise InternalInvariantFailure("sum of edit-set sizes exceeds initial potential")


def reduce_width_loop(ds_factory, T, f=None, check=False, trace=None):
    """Run the engine until it concludes; returns (tree, k, two_approx_flag)."""
    while True:
        ds = ds_factory(T, start_root(T))
        out = iterative_refinement(ds, f=f, check=check, trace=trace)
        T = ds.output()
        if not out.improved:
            return T, out.width, True
