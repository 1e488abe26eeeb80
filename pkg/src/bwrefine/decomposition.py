"""Branch decomposition trees over a dense ground set 0..n-1.

Element sets are Python ints used as bitsets. A tripartition is a triple of
disjoint masks covering the ground set (parts may be empty).
"""
from collections import deque
from dataclasses import dataclass, field

from .errors import InternalInvariantFailure, InvalidImprovement, NoDecomposition


def popcount(x):
    return x.bit_count()


def bits(x):
    """Indices of set bits, ascending."""
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


class DecompositionTree:
    """Cubic tree with a bijection between its leaves and ground elements.

    Nodes are integer ids; removed ids go to a freelist and are reused.
    """

    def __init__(self):
        self.adj = []
        self.free = []
        self.elem = {}  # leaf node -> element
        self.leaf = {}  # element -> leaf node

    # -- construction -----------------------------------------------------
    def new_node(self):
        if self.free:
            x = self.free.pop()
            self.adj[x] = []
        else:
            x = len(self.adj)
            self.adj.append([])
        return x

    def delete_node(self, x):
        if self.adj[x]:
            raise InternalInvariantFailure(f"deleting node {x} with edges")
        e = self.elem.pop(x, None)
        if e is not None:
            del self.leaf[e]
        self.adj[x] = None
        self.free.append(x)

    def add_edge(self, a, b):
        self.adj[a].append(b)
        self.adj[b].append(a)

    def remove_edge(self, a, b):
        self.adj[a].remove(b)
        self.adj[b].remove(a)

    def set_leaf(self, x, element):
        self.elem[x] = element
        self.leaf[element] = x

    def add_leaf(self, element):
        x = self.new_node()
        self.set_leaf(x, element)
        return x

    # -- queries ------------------------------------------------------------
    @property
    def n_elements(self):
        return len(self.leaf)

    @property
    def full_mask(self):
        return (1 << len(self.leaf)) - 1

    def nodes(self):
        return [x for x, a in enumerate(self.adj) if a is not None]

    def alive(self, x):
        return 0 <= x < len(self.adj) and self.adj[x] is not None

    def num_nodes(self):
        return len(self.adj) - len(self.free)

    def edges(self):
        return sorted((a, b) for a, nb in enumerate(self.adj) if nb is not None for b in nb if a < b)

    def neighbors(self, x):
        return self.adj[x]

    def degree(self, x):
        return len(self.adj[x])

    def is_leaf(self, x):
        return x in self.elem

    def has_edge(self, a, b):
        return self.alive(a) and b in self.adj[a]

    def copy(self):
        t = DecompositionTree()
        t.adj = [None if a is None else list(a) for a in self.adj]
        t.free = list(self.free)
        t.elem = dict(self.elem)
        t.leaf = dict(self.leaf)
        return t

    def lowest_leaf(self):
        return self.leaf[0] if 0 in self.leaf else min(self.elem)

    def validate(self):
        """Raise InternalInvariantFailure unless this is a valid decomposition."""
        nodes = self.nodes()
        n = len(self.leaf)
        if n < 2:
            raise InternalInvariantFailure("fewer than two leaves")
        if sorted(self.leaf) != list(range(n)):
            raise InternalInvariantFailure("leaf map is not onto 0..n-1")
        for e, x in self.leaf.items():
            if self.elem.get(x) != e or not self.alive(x):
                raise InternalInvariantFailure(f"leaf map broken at element {e}")
        n_leaves = 0
        for x in nodes:
            d = len(self.adj[x])
            if len(set(self.adj[x])) != d or x in self.adj[x]:
                raise InternalInvariantFailure(f"bad adjacency at node {x}")
            for y in self.adj[x]:
                if not self.alive(y) or x not in self.adj[y]:
                    raise InternalInvariantFailure(f"asymmetric edge {x}-{y}")
            if d == 1:
                n_leaves += 1
                if x not in self.elem:
                    raise InternalInvariantFailure(f"unlabeled leaf {x}")
            elif d == 3:
                if x in self.elem:
                    raise InternalInvariantFailure(f"labeled internal node {x}")
            else:
                raise InternalInvariantFailure(f"node {x} has degree {d}")
        if n_leaves != n:
            raise InternalInvariantFailure("leaf count mismatch")
        if len(self.edges()) != len(nodes) - 1:
            raise InternalInvariantFailure("not a tree (edge count)")
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            x = stack.pop()
            for y in self.adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if len(seen) != len(nodes):
            raise InternalInvariantFailure("not connected")


def build_linear_decomposition(n, order=None):
    """Caterpillar on elements 0..n-1 attached along a spine (index order by default)."""
    if n < 2:
        raise NoDecomposition("a branch decomposition needs at least 2 elements")
    if order is None:
        order = range(n)
    elif sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the elements")
    t = DecompositionTree()
    leaves = [t.add_leaf(e) for e in order]
    if n == 2:
        t.add_edge(leaves[0], leaves[1])
        return t
    spine = [t.new_node() for _ in range(n - 2)]
    t.add_edge(spine[0], leaves[0])
    t.add_edge(spine[0], leaves[1])
    for j in range(1, n - 2):
        t.add_edge(spine[j - 1], spine[j])
        t.add_edge(spine[j], leaves[j + 1])
    t.add_edge(spine[-1], leaves[n - 1])
    return t


def random_decomposition(n, rng):
    """Random cubic tree on elements 0..n-1 by inserting leaves on random edges."""
    if n < 2:
        raise NoDecomposition("a branch decomposition needs at least 2 elements")
    order = list(range(n))
    rng.shuffle(order)
    t = DecompositionTree()
    a, b = t.add_leaf(order[0]), t.add_leaf(order[1])
    t.add_edge(a, b)
    for e in order[2:]:
        x, y = rng.choice(t.edges())
        s = t.new_node()
        t.remove_edge(x, y)
        t.add_edge(x, s)
        t.add_edge(s, y)
        t.add_edge(s, t.add_leaf(e))
    return t


# -- rooted views -------------------------------------------------------------

def rooted_order(T, r):
    """BFS order from the root edge r=(u,v) and the r-parent of every node.

    The r-parent of u is v and vice versa.
    """
    u, v = r
    if v not in T.adj[u]:
        raise InternalInvariantFailure(f"{r} is not an edge")
    parent = {u: v, v: u}
    order = [u, v]
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        p = parent[x]
        for y in T.adj[x]:
            if y != p:
                parent[y] = x
                order.append(y)
    return order, parent


def subtree_masks(T, r):
    """T_r[w] as a bitmask for every node w."""
    order, parent = rooted_order(T, r)
    mask = {}
    for x in reversed(order):
        e = T.elem.get(x)
        m = 0 if e is None else 1 << e
        p = parent[x]
        for y in T.adj[x]:
            if y != p:
                m |= mask[y]
        mask[x] = m
    return mask


def leaves_below(T, r, w):
    return subtree_masks(T, r)[w]


def side_masks(T):
    """Map each directed edge (a, b) to the leaf set T[ab] on a's side."""
    a0 = T.leaf[0]
    r = (a0, T.adj[a0][0])
    order, parent = rooted_order(T, r)
    mask = subtree_masks(T, r)
    full = T.full_mask
    out = {}
    for x in order:
        p = parent[x]
        out[(x, p)] = mask[x]
        out[(p, x)] = full ^ mask[x]
    return out


def width_of(T, f):
    """Maximum edge width and the list of edges attaining it."""
    sides = side_masks(T)
    best = -1
    heavy = []
    for a, b in T.edges():
        w = f(sides[(a, b)])
        if w > best:
            best, heavy = w, [(a, b)]
        elif w == best:
            heavy.append((a, b))
    return best, heavy


def normalize_cut(mask, full):
    """Canonical side of a bipartition: the one not containing element 0."""
    return full ^ mask if mask & 1 else mask


def cut_family(T):
    full = T.full_mask
    sides = side_masks(T)
    return {normalize_cut(sides[(a, b)], full) for a, b in T.edges()}


def observation_cut_family(T, r, c):
    """Cuts that a refinement of T along (r, c) must have, by direct enumeration."""
    full = T.full_mask
    masks = subtree_masks(T, r)
    out = set()
    for ci in c:
        cands = [ci] + [m & ci for m in masks.values()]
        for m in cands:
            if m and m != full:
                out.add(normalize_cut(m, full))
    return out


def intersects(mask, c):
    """Number of parts of c meeting mask."""
    return sum(1 for ci in c if mask & ci)


def r_intersected_nodes(T, r, c):
    masks = subtree_masks(T, r)
    return {w for w, m in masks.items() if intersects(m, c) >= 2}


def tripartition_from_parts(part_of):
    """part_of[e] in {1,2,3} -> triple of masks."""
    c = [0, 0, 0]
    for e, p in enumerate(part_of):
        c[p - 1] |= 1 << e
    return tuple(c)


# -- refinement ----------------------------------------------------------------

def refine(T, r, c):
    """Refinement of T along root edge r and tripartition c, built from scratch.

    Three copies of T are glued through w_1, w_2, w_3 to a center t, then
    unlabeled leaves are pruned and degree-2 nodes suppressed.
    """
    u, v = r
    if v not in T.adj[u]:
        raise InvalidImprovement(f"{r} is not an edge")
    adj = {}

    def link(a, b):
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)

    label = {}
    for i in range(3):
        w = ("w", i)
        link(w, "t")
        for a, b in T.edges():
            if {a, b} == {u, v}:
                link((i, u), w)
                link(w, (i, v))
            else:
                link((i, a), (i, b))
        for x, e in T.elem.items():
            if c[i] >> e & 1:
                label[(i, x)] = e
    stack = [x for x in adj if len(adj[x]) <= 1 and x not in label]
    while stack:
        x = stack.pop()
        if x not in adj or x in label or len(adj[x]) > 1:
            continue
        for y in adj.pop(x):
            adj[y].discard(x)
            if len(adj[y]) <= 1 and y not in label:
                stack.append(y)
    for x in [x for x in adj if len(adj[x]) == 2 and x not in label]:
        a, b = adj.pop(x)
        adj[a].discard(x)
        adj[b].discard(x)
        link(a, b)
    out = DecompositionTree()
    ids = {}
    start = next(x for x in adj if label.get(x) == 0)
    queue = deque([start])
    ids[start] = out.new_node()
    while queue:
        x = queue.popleft()
        for y in sorted(adj[x], key=repr):
            if y not in ids:
                ids[y] = out.new_node()
                out.add_edge(ids[x], ids[y])
                queue.append(y)
    for x, e in label.items():
        if x in ids:
            out.set_leaf(ids[x], e)
    return out


@dataclass
class EditSetResult:
    root: tuple
    R: frozenset
    N: tuple  # three frozensets of node ids

    @property
    def N1(self):
        return self.N[0]

    @property
    def N2(self):
        return self.N[1]

    @property
    def N3(self):
        return self.N[2]

    def part_of_neighbor(self, w):
        for i in range(3):
            if w in self.N[i]:
                return i
        raise KeyError(w)


def edit_set(T, r, c):
    """Nodes whose r-subtree meets at least two parts, and their neighbor partition."""
    u, v = r
    masks = subtree_masks(T, r)
    if intersects(masks[u], c) < 2 or intersects(masks[v], c) < 2:
        raise InvalidImprovement("tripartition must r-intersect both root endpoints")
    R = frozenset(w for w, m in masks.items() if intersects(m, c) >= 2)
    N = [set(), set(), set()]
    for x in R:
        for y in T.adj[x]:
            if y not in R:
                i = next(j for j in range(3) if masks[y] & c[j])
                N[i].add(y)
    return EditSetResult(r, R, tuple(frozenset(s) for s in N))


def check_edit_set(T, es):
    """Structural properties of an edit set; raises InternalInvariantFailure."""
    R = es.R
    u, v = es.root
    if u not in R or v not in R:
        raise InternalInvariantFailure("root endpoints missing from edit set")
    for x in R:
        if len(T.adj[x]) != 3:
            raise InternalInvariantFailure(f"edit-set node {x} is not internal")
    seen = {u}
    stack = [u]
    while stack:
        x = stack.pop()
        for y in T.adj[x]:
            if y in R and y not in seen:
                seen.add(y)
                stack.append(y)
    if seen != set(R):
        raise InternalInvariantFailure("edit set not connected")
    nbrs = {y for x in R for y in T.adj[x] if y not in R}
    union = set()
    for i in range(3):
        if union & es.N[i]:
            raise InternalInvariantFailure("neighbor partition not disjoint")
        union |= es.N[i]
    if union != nbrs:
        raise InternalInvariantFailure("neighbor partition does not cover N(R)")


@dataclass
class SpliceResult:
    new_nodes: list
    origin: dict  # new node -> ("copy", x, i) | ("w", i) | ("t",)
    root: int  # center node of the new region (t, or w_b for arity 2)
    parent: dict  # new node -> parent toward root (None at root)
    postorder: list  # new nodes, children before parents
    rparent: dict  # old edit-set node -> its r-parent before the splice
    reattached: dict  # neighbor-partition node -> (old parent, new neighbor)
    removed: list = field(default_factory=list)
    created: int = 0  # new nodes before suppression


def splice_refinement(T, es):
    """Apply the refinement in place, touching only the edit set.

    Copies of the edit-set nodes are created only for parts actually present
    below them, so no pruning is needed; degree-2 copies are suppressed.
    """
    u, v = es.root
    R = es.R
    part = {}
    for i in range(3):
        for y in es.N[i]:
            part[y] = i
    rpar = {u: v, v: u}
    order = [u, v]
    children = {}
    j = 0
    while j < len(order):
        x = order[j]
        j += 1
        ch = [y for y in T.adj[x] if y != rpar[x]]
        children[x] = ch
        for y in ch:
            if y in R:
                rpar[y] = x
                order.append(y)
    if len(order) != len(R):
        raise InternalInvariantFailure("edit set not connected through the root")
    has = {}
    for x in reversed(order):
        m = 0
        for y in children[x]:
            m |= has[y] if y in R else 1 << part[y]
        has[x] = m

    origin = {}
    copy = {}
    for x in order:
        for i in range(3):
            if has[x] >> i & 1:
                y = T.new_node()
                copy[(x, i)] = y
                origin[y] = ("copy", x, i)
    present = has[u] | has[v]
    t = T.new_node()
    origin[t] = ("t",)
    wnode = {}
    for i in range(3):
        if present >> i & 1:
            wnode[i] = T.new_node()
            origin[wnode[i]] = ("w", i)
            T.add_edge(wnode[i], t)
            for end in (u, v):
                if has[end] >> i & 1:
                    T.add_edge(copy[(end, i)], wnode[i])
    for x in order[2:]:
        for i in range(3):
            if has[x] >> i & 1:
                T.add_edge(copy[(x, i)], copy[(rpar[x], i)])
    old_parent = {}
    for x in order:
        for y in children[x]:
            if y not in R:
                T.remove_edge(x, y)
                T.add_edge(y, copy[(x, part[y])])
                old_parent[y] = x
    for x in order:
        for y in list(T.adj[x]):
            T.remove_edge(x, y)
    for x in order:
        T.delete_node(x)

    created = len(origin)
    for x in list(origin):
        if len(T.adj[x]) == 2:
            a, b = T.adj[x]
            T.remove_edge(x, a)
            T.remove_edge(x, b)
            T.add_edge(a, b)
            T.delete_node(x)
            del origin[x]
    survivors = list(origin)
    alive = set(survivors)
    if t in alive:
        root = t
    else:
        root = wnode[max(wnode)]
    parent = {root: None}
    bfs = [root]
    k = 0
    while k < len(bfs):
        x = bfs[k]
        k += 1
        for y in T.adj[x]:
            if y in alive and y not in parent:
                parent[y] = x
                bfs.append(y)
    if len(bfs) != len(survivors):
        raise InternalInvariantFailure("new region not connected")
    reattached = {}
    for y, p in old_parent.items():
        nb = next(z for z in T.adj[y] if z in alive)
        reattached[y] = (p, nb)
    return SpliceResult(survivors, origin, root, parent, bfs[::-1], rpar, reattached, order, created)


# -- text format ---------------------------------------------------------------

def format_decomposition(T, mode, labels):
    """Serialize; labels[e] is the external label of element e."""
    nodes = T.nodes()
    ren = {x: i for i, x in enumerate(nodes)}
    lines = [f"decomp {mode} {T.n_elements} {len(nodes)}"]
    edges = sorted(tuple(sorted((ren[a], ren[b]))) for a, b in T.edges())
    lines += [f"edge {a} {b}" for a, b in edges]
    for x in nodes:
        if x in T.elem:
            lines.append(f"leaf {ren[x]} {labels[T.elem[x]]}")
    return "\n".join(lines) + "\n"


def parse_decomposition(text, label_index):
    """Inverse of format_decomposition.

    label_index maps external labels to elements. Returns (mode, tree) and
    raises ValueError on malformed input or unknown labels.
    """
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0][0] != "decomp" or len(lines[0]) != 4:
        raise ValueError("missing decomp header")
    mode = lines[0][1]
    n_elem, n_nodes = int(lines[0][2]), int(lines[0][3])
    T = DecompositionTree()
    for _ in range(n_nodes):
        T.new_node()
    for no, parts in enumerate(lines[1:], start=2):
        if parts[0] == "edge" and len(parts) == 3:
            a, b = int(parts[1]), int(parts[2])
            if not (0 <= a < n_nodes and 0 <= b < n_nodes) or a == b or b in T.adj[a]:
                raise ValueError(f"line {no}: bad edge {a} {b}")
            T.add_edge(a, b)
        elif parts[0] == "leaf" and len(parts) == 3:
            x = int(parts[1])
            if parts[2] not in label_index:
                raise ValueError(f"line {no}: unknown label {parts[2]}")
            e = label_index[parts[2]]
            if not 0 <= x < n_nodes or x in T.elem or e in T.leaf:
                raise ValueError(f"line {no}: duplicate or bad leaf {x}")
            T.set_leaf(x, e)
        else:
            raise ValueError(f"line {no}: unrecognized record")
    if T.n_elements != n_elem:
        raise ValueError("leaf count differs from header")
    return mode, T
