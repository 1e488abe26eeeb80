import random

import pytest

from bwrefine.decomposition import (DecompositionTree, EditSetResult, build_linear_decomposition,
                                    check_edit_set, cut_family, edit_set, format_decomposition,
                                    leaves_below, normalize_cut, observation_cut_family,
                                    parse_decomposition, random_decomposition, refine,
                                    side_masks, splice_refinement, subtree_masks,
                                    tripartition_from_parts, width_of)
from bwrefine.errors import InternalInvariantFailure, InvalidImprovement, NoDecomposition
from bwrefine.oracle import enumerate_decompositions

A, B, C, D, E, F, G, H = range(8)


def fig1_tree():
    """Top tree of the refinement example: leaves a..h are elements 0..7."""
    T = DecompositionTree()
    leaf = {e: T.add_leaf(e) for e in range(8)}
    n = {name: T.new_node() for name in "uvxyzw"}
    for a, b in ["uv", "ux", "uy", "vz", "zw"]:
        T.add_edge(n[a], n[b])
    for x, e in [("x", A), ("x", B), ("y", D), ("y", C), ("z", G), ("v", H), ("w", E), ("w", F)]:
        T.add_edge(n[x], leaf[e])
    return T, n


def m(*elems):
    out = 0
    for e in elems:
        out |= 1 << e
    return out


FIG1_C = (m(A, B, G), m(C, E, F), m(D, H))


def test_linear_small_cases():
    t2 = build_linear_decomposition(2)
    assert t2.num_nodes() == 2 and len(t2.edges()) == 1
    t3 = build_linear_decomposition(3)
    assert t3.num_nodes() == 4 and len(t3.edges()) == 3
    t5 = build_linear_decomposition(5)
    t5.validate()
    assert t5.num_nodes() == 8 and len(t5.edges()) == 7


def test_linear_rejects_tiny():
    with pytest.raises(NoDecomposition):
        build_linear_decomposition(1)


def test_linear_custom_order():
    T = build_linear_decomposition(4, [2, 0, 3, 1])
    T.validate()
    with pytest.raises(ValueError):
        build_linear_decomposition(3, [0, 0, 1])


def test_fig1_leaves_below():
    T, n = fig1_tree()
    r = (n["u"], n["v"])
    assert leaves_below(T, r, n["x"]) == m(A, B)
    assert leaves_below(T, r, T.leaf[C]) == m(C)
    assert leaves_below(T, r, n["u"]) == m(A, B, C, D)
    assert leaves_below(T, r, n["u"]) | leaves_below(T, r, n["v"]) == T.full_mask


def test_leaves_below_partition_random():
    rng = random.Random(3)
    for _ in range(30):
        T = random_decomposition(rng.randint(3, 12), rng)
        a, b = rng.choice(T.edges())
        masks = subtree_masks(T, (a, b))
        assert masks[a] & masks[b] == 0 and masks[a] | masks[b] == T.full_mask
        parent = {a: b, b: a}
        stack = [a, b]
        while stack:
            x = stack.pop()
            kids = [y for y in T.adj[x] if y != parent[x]]
            if kids:
                assert masks[kids[0]] & masks[kids[1]] == 0
                assert masks[kids[0]] | masks[kids[1]] == masks[x]
            for y in kids:
                parent[y] = x
                stack.append(y)


def test_width_of_two_leaves():
    T = build_linear_decomposition(2)
    w, heavy = width_of(T, lambda S: 1 if S not in (0, 3) else 0)
    assert w == 1 and len(heavy) == 1


def test_cut_family_small():
    T = build_linear_decomposition(2)
    assert cut_family(T) == {0b10}
    T3 = build_linear_decomposition(3)
    assert cut_family(T3) == {0b010, 0b100, 0b110}
    assert len(cut_family(T3)) == len(T3.edges())


def test_fig1_refine_bottom_tree():
    T, n = fig1_tree()
    T2 = refine(T, (n["u"], n["v"]), FIG1_C)
    T2.validate()
    full = T2.full_mask
    expected = {normalize_cut(1 << e, full) for e in range(8)}
    expected |= {normalize_cut(x, full) for x in
                 (m(A, B), m(A, B, G), m(E, F), m(C, E, F), m(D, H))}
    assert cut_family(T2) == expected
    # center t has three neighbors carrying the parts
    t = next(x for x in T2.nodes()
             if len(T2.adj[x]) == 3 and {normalize_cut(side_masks(T2)[(y, x)], full)
                                          for y in T2.adj[x]} == {normalize_cut(c, full) for c in FIG1_C})
    assert t is not None


def test_fig1_observation_formula():
    T, n = fig1_tree()
    r = (n["u"], n["v"])
    assert cut_family(refine(T, r, FIG1_C)) == observation_cut_family(T, r, FIG1_C)


def test_fig1_edit_set():
    T, n = fig1_tree()
    es = edit_set(T, (n["u"], n["v"]), FIG1_C)
    # x = {a, b} and w = {e, f} lie inside a single part
    assert es.R == {n["u"], n["v"], n["y"], n["z"]}
    assert es.N1 == {n["x"], T.leaf[G]}
    assert es.N2 == {T.leaf[C], n["w"]}
    assert es.N3 == {T.leaf[D], T.leaf[H]}
    check_edit_set(T, es)


def test_fig1_splice_matches_refine():
    T, n = fig1_tree()
    r = (n["u"], n["v"])
    ref = cut_family(refine(T, r, FIG1_C))
    es = edit_set(T, r, FIG1_C)
    outside = {x: list(T.adj[x]) for x in T.nodes() if x not in es.R}
    sp = splice_refinement(T, es)
    T.validate()
    assert cut_family(T) == ref
    assert len(sp.new_nodes) == len(es.R)
    assert sp.created <= 3 * len(es.R) + 4
    for x in outside:
        assert T.alive(x)


def test_refine_trivial_part():
    rng = random.Random(1)
    T = random_decomposition(7, rng)
    a, b = T.edges()[0]
    T2 = refine(T, (a, b), (T.full_mask, 0, 0))
    assert cut_family(T2) == cut_family(T)


def test_refine_path_split_along_cut():
    T = build_linear_decomposition(4)
    full = T.full_mask
    sides = side_masks(T)
    x = next(mk for mk in sides.values() if bin(mk).count("1") == 2)
    r = next(e for e in T.edges() if sides[e] == x or sides[(e[1], e[0])] == x)
    c = (x, full ^ x, 0)
    fam = cut_family(refine(T, r, c))
    assert normalize_cut(x, full) in fam
    assert fam == observation_cut_family(T, r, c)


def test_edit_set_pure_sides():
    # C1 = T[uv], C2 = T[vu]: both root endpoints are pure
    rng = random.Random(2)
    for _ in range(20):
        T = random_decomposition(rng.randint(4, 10), rng)
        a, b = rng.choice(T.edges())
        masks = subtree_masks(T, (a, b))
        with pytest.raises(InvalidImprovement):
            edit_set(T, (a, b), (masks[a], masks[b], 0))


def test_edit_set_requires_mixing():
    T, n = fig1_tree()
    with pytest.raises(InvalidImprovement):
        edit_set(T, (n["u"], n["v"]), (T.full_mask, 0, 0))


def _random_mixing_tripartition(rng, T, r):
    masks = subtree_masks(T, r)
    while True:
        parts = [rng.randint(1, 3) for _ in range(T.n_elements)]
        c = tripartition_from_parts(parts)
        if all(sum(1 for ci in c if masks[x] & ci) >= 2 for x in r):
            return c


def test_splice_equals_refine_random():
    rng = random.Random(4)
    for _ in range(300):
        n = rng.randint(4, 14)
        T = random_decomposition(n, rng)
        internal = [e for e in T.edges() if all(len(T.adj[x]) == 3 for x in e)]
        if not internal:
            continue
        r = rng.choice(internal)
        c = _random_mixing_tripartition(rng, T, r)
        expected = cut_family(refine(T, r, c))
        obs = observation_cut_family(T, r, c)
        es = edit_set(T, r, c)
        check_edit_set(T, es)
        sp = splice_refinement(T, es)
        T.validate()
        assert cut_family(T) == expected == obs
        assert len(sp.new_nodes) == len(es.R)
        assert sp.created <= 3 * len(es.R) + 4


def test_edit_set_contains_root():
    rng = random.Random(5)
    for _ in range(50):
        T = random_decomposition(rng.randint(4, 10), rng)
        internal = [e for e in T.edges() if all(len(T.adj[x]) == 3 for x in e)]
        if not internal:
            continue
        r = rng.choice(internal)
        es = edit_set(T, r, _random_mixing_tripartition(rng, T, r))
        assert set(r) <= es.R


def test_check_edit_set_detects_bad_partition():
    T, n = fig1_tree()
    es = edit_set(T, (n["u"], n["v"]), FIG1_C)
    bad = EditSetResult(es.root, es.R, (es.N1 | es.N2, es.N2, es.N3))
    with pytest.raises(InternalInvariantFailure):
        check_edit_set(T, bad)


def test_validate_rejects_degree_two():
    T = DecompositionTree()
    a, b = T.add_leaf(0), T.add_leaf(1)
    s = T.new_node()
    T.add_edge(a, s)
    T.add_edge(s, b)
    with pytest.raises(InternalInvariantFailure):
        T.validate()


def test_node_ids_recycled():
    rng = random.Random(6)
    T = random_decomposition(10, rng)
    high = max(T.nodes())
    for _ in range(200):
        internal = [e for e in T.edges() if all(len(T.adj[x]) == 3 for x in e)]
        r = rng.choice(internal)
        splice_refinement(T, edit_set(T, r, _random_mixing_tripartition(rng, T, r)))
    assert max(T.nodes()) <= high + 3 * 10 + 4


def test_format_roundtrip():
    rng = random.Random(7)
    T = random_decomposition(6, rng)
    labels = [f"v{i}" for i in range(6)]
    text = format_decomposition(T, "rankwidth", labels)
    assert text.splitlines()[0] == "decomp rankwidth 6 10"
    mode, T2 = parse_decomposition(text, {lab: i for i, lab in enumerate(labels)})
    assert mode == "rankwidth"
    T2.validate()
    assert cut_family(T2) == cut_family(T)
    assert format_decomposition(T2, "rankwidth", labels) == text


def test_parse_rejects_unknown_label():
    T = build_linear_decomposition(3)
    text = format_decomposition(T, "rankwidth", ["1", "2", "3"]).replace("leaf 2 3", "leaf 2 9")
    with pytest.raises(ValueError):
        parse_decomposition(text, {"1": 0, "2": 1, "3": 2})


def test_enumerated_trees_validate():
    for T in enumerate_decompositions(5):
        T.validate()
