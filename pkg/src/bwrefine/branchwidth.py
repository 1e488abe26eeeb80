"""Refinement data structure for branchwidth of graphs.

Ground elements are edge indices. Vertex sets are bitmasks over vertices.
"""
from dataclasses import dataclass, field

from .connectivity import BorderSize, border
from .decomposition import bits, build_linear_decomposition, popcount
from .engine import RefinementStructure, reduce_width_loop
from .errors import InternalInvariantFailure, NoDecomposition
from .decomposition import splice_refinement


@dataclass
class BorderDescription:
    border: int  # vertex mask of δ(X)
    counts: dict = field(default_factory=dict)  # vertex -> number of X-edges there

    def size(self):
        return popcount(self.border)


def leaf_border_description(g, e):
    bd = BorderDescription(0, {})
    for x in g.edges[e]:
        if g.degree(x) > 1:
            bd.border |= 1 << x
            bd.counts[x] = 1
    return bd


def compose_border_descriptions(bx, by, degrees):
    counts = dict(bx.counts)
    for x, c in by.counts.items():
        counts[x] = counts.get(x, 0) + c
    out = BorderDescription(0, {})
    for x, c in counts.items():
        if c < degrees[x]:
            out.border |= 1 << x
            out.counts[x] = c
    return out


def complement_border_description(bd, degrees):
    return BorderDescription(bd.border, {x: degrees[x] - c for x, c in bd.counts.items()})


def border_description_from_scratch(g, X):
    counts = {}
    for i, (a, b) in enumerate(g.edges):
        if X >> i & 1:
            counts[a] = counts.get(a, 0) + 1
            counts[b] = counts.get(b, 0) + 1
    d = border(g, X)
    return BorderDescription(d, {x: c for x, c in counts.items() if d >> x & 1})


# A border of a tripartition is the tuple (R1, R2, R3, r, k1, k2, k3) where R_i
# are vertex masks, r is a 3-bit mask of nonempty parts and k_i the hidden
# border counts.

def build_tripartition_border(g, e, part):
    """Border of the tripartition of the single edge e placing it in part 0..2."""
    R = [0, 0, 0]
    R[part] = leaf_border_description(g, e).border
    return (R[0], R[1], R[2], 1 << part, 0, 0, 0)


def compose_tripartition_borders(bx, by, dx, dy, da):
    f = (dx | dy) & ~da
    u0, u1, u2 = bx[0] | by[0], bx[1] | by[1], bx[2] | by[2]
    return (
        da & u0, da & u1, da & u2,
        bx[3] | by[3],
        bx[4] + by[4] + popcount(f & u0 & (u1 | u2)),
        bx[5] + by[5] + popcount(f & u1 & (u0 | u2)),
        bx[6] + by[6] + popcount(f & u2 & (u0 | u1)),
    )


def tripartition_border_from_scratch(g, A, c):
    """Direct evaluation of the border of tripartition c of edge set A."""
    dA = border(g, A)
    out_R, out_k = [], []
    r = 0
    for i, ci in enumerate(c):
        ci &= A
        if ci:
            r |= 1 << i
        dc = border(g, ci)
        out_R.append(dc & dA)
        out_k.append(popcount(dc & border(g, A & ~ci) & ~dA))
    return (out_R[0], out_R[1], out_R[2], r, out_k[0], out_k[1], out_k[2])


def _iw(r):
    return 1 if r not in (0, 1, 2, 4) else 0


def _group(tab):
    """Entries grouped by their border part: (R1, R2, R3, r) -> [(k1, k2, k3, I)]."""
    out = {}
    for e, i in tab.items():
        out.setdefault(e[:4], []).append((e[4], e[5], e[6], i))
    return out


def _compose_group(g1, g2, dx, dy, da):
    """Border part of a composition and the hidden counts it adds."""
    f = (dx | dy) & ~da
    u0, u1, u2 = g1[0] | g2[0], g1[1] | g2[1], g1[2] | g2[2]
    return ((da & u0, da & u1, da & u2, g1[3] | g2[3]),
            ((f & u0 & (u1 | u2)).bit_count(), (f & u1 & (u0 | u2)).bit_count(),
             (f & u2 & (u0 | u1)).bit_count()))


def _buckets(groups, f, da):
    """Groups bucketed by their projection on the hidden vertices f."""
    out = {}
    for g, lst in groups.items():
        key = (g[0] & f, g[1] & f, g[2] & f)
        out.setdefault(key, []).append((g[0] & da, g[1] & da, g[2] & da, g[3], lst))
    return out


def _hidden_add(p1, p2, f):
    u0, u1, u2 = p1[0] | p2[0], p1[1] | p2[1], p1[2] | p2[2]
    return ((f & u0 & (u1 | u2)).bit_count(), (f & u1 & (u0 | u2)).bit_count(),
            (f & u2 & (u0 | u1)).bit_count())


def combine_rtables(tab1, tab2, dx, dy, da, kbound):
    """Table of a node from its children's tables (entry -> min intersections).

    Same result as composing every entry pair with compose_tripartition_borders.
    Child borders lie inside da plus the hidden vertices f, so the added hidden
    counts depend only on the projections on f and are computed per bucket pair.
    """
    f = (dx | dy) & ~da
    out = {}
    bk1, bk2 = _buckets(_group(tab1), f, da), _buckets(_group(tab2), f, da)
    for p1, gs1 in bk1.items():
        for p2, gs2 in bk2.items():
            a0, a1, a2 = _hidden_add(p1, p2, f)
            if a0 > kbound or a1 > kbound or a2 > kbound:
                continue
            for r0, r1, r2, rr, l1 in gs1:
                for s0, s1, s2, sr, l2 in gs2:
                    r = rr | sr
                    head = (r0 | s0, r1 | s1, r2 | s2, r)
                    iw = 1 if r not in (1, 2, 4) else 0
                    for x0, x1, x2, i1 in l1:
                        for y0, y1, y2, i2 in l2:
                            k0, k1, k2 = x0 + y0 + a0, x1 + y1 + a1, x2 + y2 + a2
                            if k0 > kbound or k1 > kbound or k2 > kbound:
                                continue
                            e = head + (k0, k1, k2)
                            val = i1 + i2 + iw
                            old = out.get(e)
                            if old is None or val < old:
                                out[e] = val
    return out


def _side_ok(e, width):
    return all(e[4 + i] + popcount(e[i]) < width for i in range(3))


def root_decide(tab_u, tab_v, du, dv, width):
    """Best root pair by (max k_i, arity, sum k_i, I_u + I_v), or None."""
    f = du | dv

    def usable(tab):
        # the hidden count a group adds on its own is a lower bound for any partner
        out = {}
        for g, lst in _group({e: i for e, i in tab.items() if _side_ok(e, width)}).items():
            low = _hidden_add(g, (0, 0, 0), f)
            if 2 * max(low) < width:
                out[g] = lst
        return out

    grp_u, grp_v = usable(tab_u), usable(tab_v)
    best = None
    for gu, lu in grp_u.items():
        for gv, lv in grp_v.items():
            head, (a0, a1, a2) = _compose_group(gu, gv, du, dv, 0)
            arity = popcount(head[3])
            if arity < 2 or 2 * max(a0, a1, a2) >= width:
                continue
            for x0, x1, x2, iu in lu:
                for y0, y1, y2, iv in lv:
                    ks = (x0 + y0 + a0, x1 + y1 + a1, x2 + y2 + a2)
                    if 2 * max(ks) >= width:
                        continue
                    key = (max(ks), arity, sum(ks), iu + iv)
                    if best is None or key < best[0]:
                        best = (key, gu + (x0, x1, x2), gv + (y0, y1, y2))
    return best


class BranchwidthStructure(RefinementStructure):
    """Branch decomposition of g with border descriptions and r-tables.

    k bounds the widths the tables are built for; by default it is the
    current width of the tree.
    """

    def __init__(self, g, tree, root, k=None):
        self.g = g
        self.f = BorderSize(g)
        self.deg = [g.degree(x) for x in range(g.n)]
        self.bd = {}
        super().__init__(tree, root, 0)
        self._augment()
        if k is None:
            k = max(self.bd[(a, b)].size() for a, b in tree.edges())
        self.k = k
        self.kbound = max(k - 1, 0) // 2
        self._build_all()

    def _augment(self):
        T = self.tree
        u, v = self.root
        parent = {u: v, v: u}
        order = [u, v]
        for x in order:
            for y in T.adj[x]:
                if y != parent[x]:
                    parent[y] = x
                    order.append(y)
        low = {}
        for x in reversed(order):
            low[x] = self._lower(x, parent[x], lambda c, _x=x: low[c])
        for x in order:
            p = parent[x]
            self.bd[(x, p)] = low[x]
            self.bd[(p, x)] = complement_border_description(low[x], self.deg)

    def _lower(self, x, p, child_bd):
        T = self.tree
        e = T.elem.get(x)
        if e is not None:
            return leaf_border_description(self.g, e)
        cs = [c for c in T.adj[x] if c != p]
        return compose_border_descriptions(child_bd(cs[0]), child_bd(cs[1]), self.deg)

    def _rebuild(self, x, p):
        T = self.tree
        e = T.elem.get(x)
        if e is not None:
            tab = {build_tripartition_border(self.g, e, i): 0 for i in range(3)}
        else:
            c1, c2 = [c for c in T.adj[x] if c != p]
            tab = combine_rtables(self.tabs[c1], self.tabs[c2], self.bd[(c1, x)].border,
                                  self.bd[(c2, x)].border, self.bd[(x, p)].border, self.kbound)
        self.tabs[x] = tab
        self.tab_parent[x] = p

    def width(self):
        u, v = self.root
        return self.bd[(u, v)].size()

    def _decide(self):
        if self._answer is None:
            u, v = self.root
            wd = self.width()
            if wd > self.k:
                raise InternalInvariantFailure("root wider than the structure bound")
            self._answer = (self.root, root_decide(self.tabs[u], self.tabs[v], self.bd[(u, v)].border,
                                                   self.bd[(v, u)].border, wd))
        return self._answer[1]

    def can_refine(self):
        return self._decide() is not None

    def decision(self):
        """(max k_i, arity, sum k_i, intersections) of the chosen improvement."""
        best = self._decide()
        return None if best is None else best[0]

    def edit_set(self):
        best = self._decide()
        if best is None:
            raise InternalInvariantFailure("no improvement to extract")
        return extract_edit_set(self, best[1], best[2])

    def refine(self, es):
        T = self.tree
        old_adj = {x: list(T.adj[x]) for x in es.R}
        sp = splice_refinement(T, es)
        bd = self.bd
        for c, (p, nb) in sp.reattached.items():
            bd[(c, nb)] = bd[(c, p)]
            bd[(nb, c)] = bd[(p, c)]
        for x, nbrs in old_adj.items():
            for y in nbrs:
                bd.pop((x, y), None)
                bd.pop((y, x), None)
        self.forget(es.R)
        self.forget(sp.new_nodes)
        for c, (p, nb) in sp.reattached.items():
            self.tab_parent[c] = nb
        self._refresh(sp)
        top = sp.root
        child = next(y for y in sp.new_nodes if sp.parent[y] == top)
        for y in sp.postorder:
            if y != top:
                self._rebuild(y, sp.parent[y])
        self._rebuild(top, child)
        self.root = (top, child)
        self._answer = None
        return sp

    def _refresh(self, sp):
        for y in sp.postorder:
            p = sp.parent[y]
            if p is None:
                continue
            low = self._lower(y, p, lambda c, _y=y: self.bd[(c, _y)])
            self.bd[(y, p)] = low
            self.bd[(p, y)] = complement_border_description(low, self.deg)

    def check(self):
        """Stored border descriptions and widths agree with direct evaluation."""
        from .decomposition import side_masks
        sides = side_masks(self.tree)
        for (a, b), m in sides.items():
            bd = self.bd.get((a, b))
            ref = border_description_from_scratch(self.g, m)
            if bd is None or bd.border != ref.border or bd.counts != ref.counts:
                raise InternalInvariantFailure(f"border description of ({a},{b}) is stale")
        if len(self.bd) != len(sides):
            raise InternalInvariantFailure("stale border descriptions kept")


def extract_edit_set(ds, eu, ev):
    """Decode the edit set of the chosen root pair by re-scanning child tables."""
    from .decomposition import EditSetResult
    T = ds.tree
    u, v = ds.root
    R = set()
    N = [set(), set(), set()]
    queue = [(u, v, eu), (v, u, ev)]
    while queue:
        x, p, e = queue.pop()
        r = e[3]
        if r in (1, 2, 4):
            N[r.bit_length() - 1].add(x)
            continue
        R.add(x)
        if x in T.elem:
            raise InternalInvariantFailure("leaf entry mixes parts")
        c1, c2 = [c for c in T.adj[x] if c != p]
        target = ds.tabs[x][e]
        d1, d2, da = ds.bd[(c1, x)].border, ds.bd[(c2, x)].border, ds.bd[(x, p)].border
        found = None
        grp2 = _group(ds.tabs[c2])
        for g1, l1 in _group(ds.tabs[c1]).items():
            for g2, l2 in grp2.items():
                head, add = _compose_group(g1, g2, d1, d2, da)
                if head != e[:4]:
                    continue
                for a in l1:
                    for b in l2:
                        if (a[3] + b[3] + 1 == target
                                and all(a[i] + b[i] + add[i] == e[4 + i] for i in range(3))):
                            found = (g1 + a[:3], g2 + b[:3])
                            break
                    if found:
                        break
                if found:
                    break
            if found:
                break
        if found is None:
            raise InternalInvariantFailure(f"no child pair reproduces the entry at node {x}")
        queue.append((c1, x, found[0]))
        queue.append((c2, x, found[1]))
    return EditSetResult(ds.root, frozenset(R), tuple(frozenset(s) for s in N))


def bfs_edge_order(g):
    """Edges sorted by the BFS position of their later endpoint, then the earlier one.

    A caterpillar in this order has width at most about the BFS bandwidth, which
    keeps the first tables small.
    """
    pos = [-1] * g.n
    nxt = 0
    for s in range(g.n):
        if pos[s] >= 0:
            continue
        pos[s] = nxt
        nxt += 1
        queue = [s]
        for x in queue:
            for y in bits(g.adj[x]):
                if pos[y] < 0:
                    pos[y] = nxt
                    nxt += 1
                    queue.append(y)

    def key(i):
        a, b = sorted((pos[g.edges[i][0]], pos[g.edges[i][1]]))
        return (b, a)

    return sorted(range(len(g.edges)), key=key)


def approximate_branchwidth(g, check=False, trace=None):
    """Returns (tree, width, two_approx_flag); tree leaves are edge indices."""
    m = len(g.edges)
    if m < 2:
        raise NoDecomposition("graph needs at least two edges")
    T = build_linear_decomposition(m, bfs_edge_order(g))
    f = BorderSize(g)

    def factory(tree, root):
        return BranchwidthStructure(g, tree, root)

    return reduce_width_loop(factory, T, f=f, check=check, trace=trace)
