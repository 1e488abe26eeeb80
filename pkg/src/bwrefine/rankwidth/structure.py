"""Refinement data structure for rank decompositions and the approximator."""
from ..connectivity import CutRank
from ..decomposition import splice_refinement
from ..engine import RefinementStructure, reduce_width_loop, start_root
from ..errors import InternalInvariantFailure, NoDecomposition, RankwidthExceedsK, WidthCapExceeded
from .representatives import (AugmentedRankDecomposition, add_vertex, base_decomposition,
                              minimal_representative, rep_rank)
from .tables import combine_linked_rtables, find_global_improvement, leaf_table

DEFAULT_CAP = 3


class RankwidthStructure(RefinementStructure):
    """Augmented rank decomposition with linked r-tables toward the root edge.

    k is the width the structure works at (default: the decomposition width);
    can_refine is only defined at roots of width exactly k.
    """

    def __init__(self, aug, root, k=None, cap=DEFAULT_CAP):
        self.aug = aug
        self.g = aug.g
        super().__init__(aug.tree, root, 0)
        if k is None:
            k = aug.width()
        if k > cap:
            raise WidthCapExceeded(f"decomposition width {k} exceeds the cap {cap}")
        self.k = k
        self.kmax = max(k - 1, 0) // 2
        self.l = max(k - 1, 0)
        self._result = None
        self._build_all()

    @property
    def reps(self):
        return self.aug.reps

    def _rebuild(self, x, p):
        T = self.tree
        e = T.elem.get(x)
        if e is not None:
            tab = leaf_table(x, p, e, self.kmax, self.l)
        else:
            c1, c2 = [c for c in T.adj[x] if c != p]
            tab = combine_linked_rtables(self.g, x, p, self.tabs[c1], self.tabs[c2],
                                         self.reps[(x, p)], self.reps[(p, x)], self.kmax, self.l)
        self.tabs[x] = tab
        self.tab_parent[x] = p

    def width(self):
        u, v = self.root
        return rep_rank(self.g, self.reps[(u, v)], self.reps[(v, u)])

    def _decide(self):
        if self._answer is None:
            if self.width() != self.k:
                raise InternalInvariantFailure("improvement queries need a root of width k")
            if self.k == 0:
                res = None
            else:
                res = find_global_improvement(self.g, self.tabs, self.root, self.k)
            self._answer = (self.root, res)
        return self._answer[1]

    def can_refine(self):
        return self._decide() is not None

    def decision(self):
        res = self._decide()
        return None if res is None else res[2]

    def edit_set(self):
        res = self._decide()
        if res is None:
            raise InternalInvariantFailure("no improvement to extract")
        return res[0]

    def part_reps(self):
        return self._decide()[1]

    def refine(self, es):
        T = self.tree
        part_reps = self.part_reps()
        reps = self.reps
        old_adj = {x: list(T.adj[x]) for x in es.R}
        sp = splice_refinement(T, es)
        for c, (p, nb) in sp.reattached.items():
            reps[(c, nb)] = reps[(c, p)]
            reps[(nb, c)] = reps[(p, c)]
        refresh_representatives(self.g, T, sp, part_reps, reps)
        for x, nbrs in old_adj.items():
            for y in nbrs:
                reps.pop((x, y), None)
                reps.pop((y, x), None)
        self.forget(es.R)
        self.forget(sp.new_nodes)
        for c, (p, nb) in sp.reattached.items():
            self.tab_parent[c] = nb
        top = sp.root
        child = next(y for y in sp.new_nodes if sp.parent[y] == top)
        for y in sp.postorder:
            if y != top:
                self._rebuild(y, sp.parent[y])
        self._rebuild(top, child)
        self.root = (top, child)
        self._answer = None
        return sp

    def check(self):
        self.aug.verify()

    def output(self):
        return self.aug


def refresh_representatives(g, T, sp, part_reps, reps):
    """Minimal representatives on every new directed edge, bottom-up.

    The complement of T_r[x] ∩ C_i is the complement of T_r[x] together with
    the two other parts, so its representative is assembled from the old
    stored representative and the parts' representatives.
    """
    for y in sp.postorder:
        p = sp.parent[y]
        if p is None:
            continue
        low = 0
        for c in T.adj[y]:
            if c != p:
                low |= reps[(c, y)]
        org = sp.origin[y]
        i = org[-1]
        comp = 0
        for j in range(3):
            if j != i:
                comp |= part_reps[j]
        if org[0] == "copy":
            x = org[1]
            comp |= reps[(sp.rparent[x], x)]
        mr = minimal_representative(g, low, comp)
        reps[(y, p)] = mr.R
        reps[(p, y)] = mr.Q


def approximate_rankwidth(g, k=None, cap=DEFAULT_CAP, check=False, trace=None, on_insert=None):
    """Rank decomposition by iterative compression.

    With a target k, each step keeps the width at most 2k and raises
    RankwidthExceedsK once the engine certifies width 2k+1 ≤ 2·rw. Without a
    target, each step reduces until the engine concludes. Returns
    (augmented decomposition, width, two_approx_flag).

    on_insert(i, previous_width, aug) is called right after vertex i is added.
    """
    if g.n < 2:
        raise NoDecomposition("need at least two vertices")

    def factory(aug, root):
        return RankwidthStructure(aug, root, cap=cap)

    aug = base_decomposition(g.induced_prefix(2))
    flag = False
    for i in range(2, g.n + 1):
        if i > 2:
            prev = aug.width()
            aug = add_vertex(aug, g.induced_prefix(i), i - 1)
            if on_insert is not None:
                on_insert(i - 1, prev, aug)
        if check:
            aug.verify()
        w = aug.width()
        flag = False
        f = CutRank(aug.g) if check or trace is not None else None
        while k is None or w > 2 * k:
            root = start_root(aug.tree)
            aug, w, flag = _reduce_once(factory, aug, root, f, check, trace)
            if flag:
                if k is not None and w > 2 * k:
                    raise RankwidthExceedsK(k, w)
                break
    return aug, aug.width(), flag


def _reduce_once(factory, aug, root, f, check, trace):
    from ..engine import iterative_refinement
    ds = factory(aug, root)
    out = iterative_refinement(ds, f=f, check=check, trace=trace)
    if out.improved:
        return ds.output(), ds.output().width(), False
    return ds.output(), out.width, True
