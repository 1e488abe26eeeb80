"""Linked r-tables for the rankwidth refinement structure.

The set of improvement-embedding representatives at a node factors over the
three parts: given the tripartition restricted to the node's subtree, the
C- and W-embeddings of part i depend only on that part, and compatibility and
composition act part by part. A table therefore stores, per node,

* part states: for one part, the set of C-embedding representatives into
  R_kk for every kk ≤ kmax, the set of W-embedding representatives into R_l
  (up to the GL(l, 2) symmetry of R_l), and whether the part meets the subtree;
* blocks: triples of part-state ids, each standing for the product of its
  three parts' sets, with the minimum intersection count I and a link to the
  pair of child blocks realizing it.

The union of block products is the table's entry set. Concrete
representatives are obtained on demand by descending the links.
"""
from operator import or_

from ..decomposition import EditSetResult, bits
from ..errors import InternalInvariantFailure
from .embeddings import (CompatCache, ImprovementEmbeddingRep, canonical, concrete_union,
                         emb_compose, make_remap, orbit, w_extendable)
from .representatives import minimal_representative


class PartState:
    __slots__ = ("nonempty", "C", "W", "key")

    def __init__(self, nonempty, C, W):
        self.nonempty = nonempty
        self.C = tuple(frozenset(c) for c in C)
        self.W = frozenset(W)
        self.key = (nonempty, self.C, self.W)

    def alive(self):
        return bool(self.W) and any(self.C)


class LinkedRTable:
    """Table of one node oriented toward its parent."""

    def __init__(self, node, parent, children, rep, kmax, l):
        self.node = node
        self.parent = parent
        self.children = children
        self.rep = rep  # minimal representative mask of the subtree side
        self.kmax = kmax
        self.l = l
        self.parts = []
        self.index = {}
        self.blocks = {}  # (ps0, ps1, ps2) -> (I, link)
        self.joins = {}  # (ps_child1, ps_child2) -> (ps id or None, C links)

    def intern(self, ps):
        i = self.index.get(ps.key)
        if i is None:
            i = self.index[ps.key] = len(self.parts)
            self.parts.append(ps)
        return i

    def pure_part(self, key):
        """Index of the only nonempty part, or None if the block mixes parts."""
        parts = [i for i in range(3) if self.parts[key[i]].nonempty]
        return parts[0] if len(parts) == 1 else None

    def signature(self):
        """Content-level description for equality tests."""
        return {tuple(self.parts[i].key for i in key): val[0] for key, val in self.blocks.items()}

    def entries(self, shape):
        """Expand the blocks into ImprovementEmbeddingRep entries of the given shape,
        with their minimum intersection counts (small tables only).
        """
        k1, k2, k3, l = shape
        if l != self.l or max(k1, k2, k3) > self.kmax:
            return {}
        out = {}
        for key, (I, _) in self.blocks.items():
            ps = [self.parts[i] for i in key]
            cs = [ps[0].C[k1], ps[1].C[k2], ps[2].C[k3]]
            ws = [[w for c in p.W for w in orbit(c, l)] for p in ps]
            for c0 in cs[0]:
                for c1 in cs[1]:
                    for c2 in cs[2]:
                        for w0 in ws[0]:
                            for w1 in ws[1]:
                                for w2 in ws[2]:
                                    e = ImprovementEmbeddingRep((c0, c1, c2), (w0, w1, w2), shape)
                                    if e not in out or I < out[e]:
                                        out[e] = I
        return out


def _leaf_values(xbit, K, inside):
    off = 0 if inside else K
    out = []
    for X in range(K):
        f = [0] * (2 * K)
        f[off + X] = xbit
        out.append(tuple(f))
    return out


def leaf_table(node, parent, x, kmax, l):
    tab = LinkedRTable(node, parent, (), 1 << x, kmax, l)
    ids = []
    for inside in (True, False):
        C = [_leaf_values(1 << x, 1 << kk, inside) for kk in range(kmax + 1)]
        W = {canonical(f, l) for f in _leaf_values(1 << x, 1 << l, inside)}
        ids.append(tab.intern(PartState(inside, C, W)))
    i_in, i_out = ids
    for p in range(3):
        key = tuple(i_in if q == p else i_out for q in range(3))
        tab.blocks[key] = (0, None)
    return tab


def combine_linked_rtables(g, node, parent, t1, t2, rep, comp_rep, kmax, l):
    """Table of node from its children's tables.

    rep / comp_rep are the minimal representatives of the node's subtree side
    and of its complement.
    """
    tab = LinkedRTable(node, parent, (t1.node, t2.node), rep, kmax, l)
    remap = make_remap(g, rep, comp_rep)
    prof = CompatCache(g.adj).profile
    canon = {}
    lists = {}
    orbits = {}

    def orbit_of(t):
        ob = orbits.get(t)
        if ob is None:
            ob = orbits[t] = orbit(t, l)
        return ob

    def plist(side, i, kk):
        """(embedding, SA, ~LA) triples of a part state; W sides of child 2
        are expanded to full GL orbits.
        """
        key = (side, i, kk)
        out = lists.get(key)
        if out is None:
            ps = (t1 if side == 1 else t2).parts[i]
            # A-side images lie in the child's representative
            other = t2.rep if side == 1 else t1.rep
            if kk is None:
                K = 1 << l
                src = ps.W if side == 1 else [tt for t in ps.W for tt in orbit_of(t)]
            else:
                K = 1 << kk
                src = ps.C[kk]
            out = []
            for f in src:
                sa, la = prof(f, K, other)
                # remap is a union homomorphism, so images compose by OR
                out.append((f, sa, ~la, tuple(map(remap, f))))
            lists[key] = out
        return out

    def join(i1, i2):
        hit = tab.joins.get((i1, i2))
        if hit is not None:
            return hit[0]
        C = []
        for kk in range(kmax + 1):
            out = {}
            right = plist(2, i2, kk)
            for s, sa, sn, rs in plist(1, i1, kk):
                for t, ta, tn, rt in right:
                    if not (sa & tn) and not (ta & sn):
                        u = tuple(map(or_, rs, rt))
                        if u not in out:
                            out[u] = (s, t)
            C.append(out)
        W = set()
        if any(C):
            right = plist(2, i2, None)
            for s, sa, sn, rs in plist(1, i1, None):
                for t, ta, tn, rt in right:
                    if not (sa & tn) and not (ta & sn):
                        u = tuple(map(or_, rs, rt))
                        c = canon.get(u)
                        if c is None:
                            c = canon[u] = canonical(u, l)
                        W.add(c)
        ps = PartState(t1.parts[i1].nonempty or t2.parts[i2].nonempty, C, W)
        pid = tab.intern(ps) if ps.alive() else None
        tab.joins[(i1, i2)] = (pid, C)
        return pid

    # nest child-2 blocks by part ids so dead joins prune whole groups
    nest = {}
    for k2, (I2, _) in t2.blocks.items():
        nest.setdefault(k2[0], {}).setdefault(k2[1], []).append((k2[2], k2, I2))
    blocks = tab.blocks
    parts = tab.parts
    memo = {}
    miss = object()

    def pid_of(i1, i2):
        r = memo.get((i1, i2), miss)
        if r is miss:
            r = memo[(i1, i2)] = join(i1, i2)
        return r

    for k1, (I1, _) in t1.blocks.items():
        a0, a1, a2 = k1
        for j0, sub in nest.items():
            p0 = pid_of(a0, j0)
            if p0 is None:
                continue
            n0 = parts[p0].nonempty
            for j1, lst in sub.items():
                p1 = pid_of(a1, j1)
                if p1 is None:
                    continue
                n01 = n0 + parts[p1].nonempty
                for j2, k2, I2 in lst:
                    p2 = memo.get((a2, j2), miss)
                    if p2 is miss:
                        p2 = memo[(a2, j2)] = join(a2, j2)
                    if p2 is None:
                        continue
                    key = (p0, p1, p2)
                    val = I1 + I2 + (1 if n01 + parts[p2].nonempty >= 2 else 0)
                    old = blocks.get(key)
                    if old is None or val < old[0]:
                        blocks[key] = (val, (k1, k2))
    return tab


class RootChoice:
    """Outcome of the root decision: chosen blocks, per-part C ranks and stats."""

    def __init__(self, stats, bu, bv, kstar):
        self.stats = stats  # (max k_i, arity, sum k_i, I_u + I_v)
        self.bu = bu
        self.bv = bv
        self.kstar = kstar


def root_decision(g, tu, tv, width):
    """Best block pair at the root edge, or None if no W-improvement exists."""
    if width < 1:
        return None
    ext_u, ext_v, kmemo = {}, {}, {}
    compat = CompatCache(g.adj).compatible
    l = tu.l

    def extendable(memo, tab, pid, far):
        r = memo.get(pid)
        if r is None:
            r = memo[pid] = any(w_extendable(g, f, l, far) for f in tab.parts[pid].W)
        return r

    def kstar(pu, pv):
        key = (pu, pv)
        if key in kmemo:
            return kmemo[key]
        res = None
        cu, cv = tu.parts[pu].C, tv.parts[pv].C
        for kk in range(tu.kmax + 1):
            if 2 * kk >= width:
                break
            K = 1 << kk
            hit = next(((s, t) for s in cu[kk] for t in cv[kk] if compat(s, t, K)), None)
            if hit is not None:
                res = (kk, hit)
                break
        kmemo[key] = res
        return res

    def usable(tab, memo, far, key):
        return all(extendable(memo, tab, key[i], far) for i in range(3))

    # blocks with a non-extendable W side can never be chosen
    ublocks = [(bu, Iu) for bu, (Iu, _) in tu.blocks.items() if usable(tu, ext_u, tv.rep, bu)]
    nest = {}
    for bv, (Iv, _) in tv.blocks.items():
        if usable(tv, ext_v, tu.rep, bv):
            nest.setdefault(bv[0], {}).setdefault(bv[1], []).append((bv[2], bv, Iv))
    pu_ne = [p.nonempty for p in tu.parts]
    pv_ne = [p.nonempty for p in tv.parts]
    best = None
    for bu, Iu in ublocks:
        a0, a1, a2 = bu
        for j0, sub in nest.items():
            r0 = kstar(a0, j0)
            if r0 is None:
                continue
            e0 = pu_ne[a0] or pv_ne[j0]
            for j1, lst in sub.items():
                r1 = kstar(a1, j1)
                if r1 is None:
                    continue
                e1 = pu_ne[a1] or pv_ne[j1]
                for j2, bv, Iv in lst:
                    arity = e0 + e1 + (pu_ne[a2] or pv_ne[j2])
                    if arity < 2:
                        continue
                    r2 = kstar(a2, j2)
                    if r2 is None:
                        continue
                    ks = [r0[0], r1[0], r2[0]]
                    stats = (max(ks), arity, sum(ks), Iu + Iv)
                    if best is None or stats < best.stats:
                        best = RootChoice(stats, bu, bv, ks)
    if best is not None:
        best.pairs = [kstar(best.bu[i], best.bv[i])[1] for i in range(3)]
    return best


def decode_edit_set(tabs, root, choice):
    """Edit set and neighbor partition by following block links from the root."""
    u, v = root
    R = set()
    N = [set(), set(), set()]
    queue = [(u, choice.bu), (v, choice.bv)]
    while queue:
        x, key = queue.pop()
        tab = tabs[x]
        p = tab.pure_part(key)
        if p is not None:
            N[p].add(x)
            continue
        R.add(x)
        link = tab.blocks[key][1]
        if link is None:
            raise InternalInvariantFailure("leaf block mixes parts")
        queue.append((tab.children[0], link[0]))
        queue.append((tab.children[1], link[1]))
    return EditSetResult(root, frozenset(R), tuple(frozenset(s) for s in N))


def concrete(tabs, x, key, i, kk, value):
    """Concrete representative of a C-value of part i: one vertex per nonempty
    R_kk vertex (or -1), lowest id within a class at pure nodes.
    """
    tab = tabs[x]
    if tab.pure_part(key) is not None:
        return tuple((m & -m).bit_length() - 1 if m else -1 for m in value)
    k1, k2 = tab.blocks[key][1]
    _, links = tab.joins[(k1[i], k2[i])]
    s, t = links[kk][value]
    c1 = concrete(tabs, tab.children[0], k1, i, kk, s)
    c2 = concrete(tabs, tab.children[1], k2, i, kk, t)
    return concrete_union(c1, c2)


def find_global_improvement(g, tabs, root, width):
    """None, or (edit set, minimal reps of the three parts, stats)."""
    u, v = root
    choice = root_decision(g, tabs[u], tabs[v], width)
    if choice is None:
        return None
    es = decode_edit_set(tabs, root, choice)
    part_reps = []
    for i in range(3):
        kk = choice.kstar[i]
        s, t = choice.pairs[i]
        cu = concrete(tabs, u, choice.bu, i, kk, s)
        cv = concrete(tabs, v, choice.bv, i, kk, t)
        c = concrete_union(cu, cv)
        K = 1 << kk
        P = Q = 0
        for h, x in enumerate(c):
            if x >= 0:
                if h < K:
                    P |= 1 << x
                else:
                    Q |= 1 << x
        part_reps.append(minimal_representative(g, P, Q).R if P else 0)
    return es, part_reps, choice.stats


def vertices_of(mask):
    return bits(mask)
