import numpy as np
import pytest

from homemb import (
    FeaturedGraph,
    SizeGuardError,
    brute_force_all,
    brute_force_rooted,
    load_or_build,
    pattern_from_name,
)


def test_triangle_rooted_in_k3(triangle):
    c3 = pattern_from_name("C3")
    # each vertex of K3 anchors both orientations of the triangle
    for v in range(3):
        assert brute_force_rooted(triangle, 0, c3, v) == 2


def test_edge_pattern_counts_degree(seven_graph):
    p2 = pattern_from_name("P2")
    for v in range(7):
        assert brute_force_rooted(seven_graph, 0, p2, v) == seven_graph.degrees[v]


def test_singleton_pattern(seven_graph):
    p1 = pattern_from_name("P1")
    assert all(brute_force_rooted(seven_graph, 0, p1, v) == 1 for v in range(7))


def test_plain_counts_are_python_ints(triangle):
    out = brute_force_rooted(triangle, 0, pattern_from_name("C3"), 0)
    assert isinstance(out, int)


def test_weighted_matches_definition():
    # product over pattern nodes of the image weight, summed over maps:
    # 3-path rooted at an end, mapped into a weighted triangle
    w = np.array([[2.0], [3.0], [5.0]])
    g = FeaturedGraph(3, [(0, 1), (1, 2), (0, 2)], w)
    p3 = pattern_from_name("P3")
    want = 0.0
    for u in (1, 2):  # neighbors of node 0
        for x in range(3):
            if x != u:  # K3: everything else is adjacent to u
                want += w[0, 0] * w[u, 0] * w[x, 0]
    got = brute_force_rooted(g, 0, p3, 0)
    assert got == pytest.approx(want, rel=1e-12)


def test_homomorphisms_can_fold_back(seven_graph):
    # the 3-path may revisit its start; count exceeds simple-path count
    p3 = pattern_from_name("P3")
    assert brute_force_rooted(seven_graph, 0, p3, 0) == 7


def test_brute_force_all_matches_per_node(triangle):
    c3 = pattern_from_name("C3")
    allv = brute_force_all(triangle, 0, c3)
    assert list(allv) == [brute_force_rooted(triangle, 0, c3, v) for v in range(3)]


def test_size_guard_triggers():
    big = load_or_build(30, [(i, i + 1) for i in range(29)])
    wide = pattern_from_name("P7")
    with pytest.raises(SizeGuardError):
        brute_force_rooted(big, 0, wide, 0)


def test_size_guard_force_override():
    big = load_or_build(30, [(i, i + 1) for i in range(29)])
    wide = pattern_from_name("P7")
    # a path graph prunes almost immediately, so forcing is still fast
    assert brute_force_rooted(big, 0, wide, 0, force=True) > 0


def test_size_guard_spares_small_cases(triangle):
    brute_force_rooted(triangle, 0, pattern_from_name("C5"), 0)  # 3^4 maps
