import pytest

from bwrefine.connectivity import BorderSize, CutRank, Graph
from bwrefine.decomposition import subtree_masks
from bwrefine.errors import RefusedEnumeration
from bwrefine.oracle import (brute_force_global_improvement, brute_force_improvement,
                             check_global_improvement, count_intersected,
                             enumerate_decompositions, exact_width, improvement_stats)

from conftest import connected_graphs, cycle, named


@pytest.mark.parametrize("n,count", [(2, 1), (3, 1), (4, 3), (5, 15), (6, 105)])
def test_enumeration_counts(n, count):
    trees = list(enumerate_decompositions(n))
    assert len(trees) == count
    from bwrefine.decomposition import cut_family
    assert len({frozenset(cut_family(T)) for T in trees}) == count


def test_enumeration_guard():
    with pytest.raises(RefusedEnumeration):
        list(enumerate_decompositions(10))
    with pytest.raises(RefusedEnumeration):
        list(enumerate_decompositions(1))


def test_exact_widths():
    assert exact_width(BorderSize(named("K4")))[0] == 3
    assert exact_width(CutRank(cycle(5)))[0] == 2
    assert exact_width(CutRank(named("P4")))[0] == 1
    for edges, bw in (([(0, 1), (1, 2)], 1), ([(0, 1), (0, 2), (0, 3)], 1),
                      ([(0, 1), (1, 2), (1, 3), (3, 4)], 2)):
        # edge 1-3 has both endpoints shared with other edges
        g = Graph(max(max(e) for e in edges) + 1, edges)
        assert exact_width(BorderSize(g))[0] == bw


def test_witness_has_reported_width():
    from bwrefine.decomposition import width_of
    f = BorderSize(named("K4"))
    w, T = exact_width(f)
    assert width_of(T, f)[0] == w


def test_no_improvement_at_width_zero():
    g = Graph(3, [(0, 1)])
    f = CutRank(g)
    assert brute_force_improvement(f, 0b100) is None


def test_improvement_exists_above_twice_width():
    # every W with f(W) > 2 bw(f) admits a W-improvement
    for g in connected_graphs(max_vertices=5):
        if g.n < 2:
            continue
        for f in (CutRank(g), BorderSize(g)):
            if f.n < 2 or f.n > 9:
                continue
            bw, _ = exact_width(f)
            for W in range(1, (1 << f.n) - 1):
                if f(W) > 2 * bw:
                    assert brute_force_improvement(f, W) is not None


def test_descriptor_invariants():
    for g in connected_graphs(max_vertices=5):
        f = CutRank(g)
        for W in range(1, (1 << g.n) - 1):
            d = brute_force_improvement(f, W)
            if d is None:
                continue
            assert 2 * d.width < f(W)
            assert d.arity in (2, 3)
            assert improvement_stats(f, W, d.tripartition) == (d.width, d.arity, d.sum_width)


def test_global_improvement_node_property():
    # f(T_r[w] ∩ C_i) ≤ f(T_r[w]), strict unless T_r[w] ⊆ C_i
    for g in connected_graphs(max_vertices=5):
        if g.n < 3:
            continue
        f = CutRank(g)
        for T in enumerate_decompositions(g.n):
            for r in T.edges():
                d = brute_force_global_improvement(f, T, r)
                if d is not None:
                    check_global_improvement(f, T, r, d.tripartition)
                    assert count_intersected(subtree_masks(T, r), d.tripartition) == d.intersect_count


def test_global_none_when_no_improvement():
    g = named("P3")
    f = CutRank(g)
    T = next(enumerate_decompositions(3))
    for r in T.edges():
        assert brute_force_global_improvement(f, T, r) is None
