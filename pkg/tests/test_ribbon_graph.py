from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import brute_automorphisms, naive_classes, shuffle_graph
from ribbonclass.graph_complex import connected_classes, enumerate_basis
from ribbonclass.ribbon_graph import (
    EMPTY_GRAPH,
    IdealEdge,
    RibbonGraph,
    automorphism_group,
    canonical_form,
    components_sign,
    connected_components,
    contract_edge,
    disjoint_union,
    enumerate_ideal_edges,
    expand_ideal_edge,
    format_graph,
    is_connected,
    parse_graph,
    relabel,
)

THETA = parse_graph("valences=[3,3]; chords=[(1,4),(2,5),(3,6)]")


def _small_graphs(max_edges=4):
    return [g for j in range(2, max_edges + 1) for i in range(1, j + 1) for g in enumerate_basis(i, j).graphs]


def test_parse_format_roundtrip():
    text = format_graph(THETA)
    assert parse_graph(text) == THETA
    assert THETA.bidegree == (2, 3)
    assert THETA.euler_characteristic == -1


@pytest.mark.parametrize(
    "text",
    [
        "valences=[3]; chords=[(1,2)]",
        "valences=[2]; chords=[(1,2)]",
        "valences=[4]; chords=[(1,2),(1,3)]",
        "nonsense",
    ],
)
def test_parse_rejects_bad_literals(text):
    with pytest.raises(ValueError):
        parse_graph(text)


def test_theta_has_aut_order_six_and_is_nonzero():
    cf = canonical_form(THETA)
    assert cf.aut_order == 6
    assert not cf.is_zero


def test_flip_negates():
    cf = canonical_form(THETA)
    flipped = canonical_form(THETA.flip_edge(0))
    assert flipped.graph == cf.graph and flipped.sign == -cf.sign
    assert canonical_form(THETA.negated()).sign == -cf.sign


def test_naive_orbit_counts_small_cells():
    # (connected classes, nonzero classes) from the orbit enumerator
    assert naive_classes(1, 2) == (2, 1)
    assert naive_classes(2, 3) == (3, 3)
    for cell in [(1, 2), (2, 3), (1, 3), (1, 4), (2, 4)]:
        count, nonzero = naive_classes(*cell)
        assert len(connected_classes(*cell)) == count
        assert enumerate_basis(*cell, True).dim == nonzero


@pytest.mark.slow
def test_naive_orbit_counts_five_edges():
    frozen = {(1, 5): (105, 88), (2, 5): (114, 109), (3, 5): (15, 15)}
    for cell, expected in frozen.items():
        assert naive_classes(*cell) == expected
        assert (len(connected_classes(*cell)), enumerate_basis(*cell, True).dim) == expected


def test_automorphisms_match_brute_force():
    for g in _small_graphs(4) + list(connected_classes(2, 4)) + list(connected_classes(1, 3)):
        count, reversing = brute_automorphisms(g)
        cf = canonical_form(g)
        assert cf.aut_order == count
        assert cf.is_zero == reversing
        group = automorphism_group(g)
        assert len(group) == count
        assert any(ch == -1 for _, ch in group) == reversing


def test_canonical_form_is_invariant_under_relabeling():
    rng = random.Random(11)
    for g in _small_graphs(5):
        cf = canonical_form(g)
        for _ in range(3):
            h, sign = shuffle_graph(g, rng)
            cg = canonical_form(h)
            assert cg.graph == cf.graph
            assert cg.sign == sign * cf.sign


def test_relabel_reports_vertex_sign():
    g = enumerate_basis(2, 4).graphs[0]
    h, sign = relabel(g, [1, 0], [1, 0])
    assert sign == -1
    assert canonical_form(h).sign == -canonical_form(g).sign


def test_contract_then_expand_roundtrip():
    for g in _small_graphs(5):
        cf = canonical_form(g)
        for e in range(g.num_edges):
            if g.is_loop(e):
                with pytest.raises(ValueError):
                    contract_edge(g, e)
                continue
            va = g.vertex_of()[g.chords[e][0]]
            back = expand_ideal_edge(contract_edge(g, e), IdealEdge(0, 0, g.valences[va] - 1))
            cb = canonical_form(back)
            assert cb.graph == cf.graph and cb.sign == cf.sign


def test_ideal_edges_of_valence_four_and_five():
    star4 = RibbonGraph((4,), ((0, 2), (1, 3)))
    assert len(enumerate_ideal_edges(star4)) == 2
    star5 = RibbonGraph((6,), ((0, 3), (1, 4), (2, 5)))
    # a k-valent vertex has k(k-3)/2 splits into parts of size at least two
    assert len(enumerate_ideal_edges(star5)) == 9
    with pytest.raises(ValueError):
        expand_ideal_edge(star4, IdealEdge(0, 0, 1))


def test_components_and_union():
    loop = enumerate_basis(1, 2).graphs[0]
    u = disjoint_union(THETA, loop)
    assert not is_connected(u)
    parts = connected_components(u)
    assert [p.bidegree for p in parts] == [(2, 3), (1, 2)]
    assert components_sign(u) == 1
    swapped = disjoint_union(loop, THETA)
    assert canonical_form(swapped).graph == canonical_form(u).graph
    # swapping two copies of a one-vertex piece reverses the orientation
    assert canonical_form(disjoint_union(loop, loop)).is_zero
    assert EMPTY_GRAPH.bidegree == (0, 0)


def test_odd_pieces_anticommute():
    a = enumerate_basis(1, 3).graphs[0]
    b = enumerate_basis(1, 2).graphs[0]
    ab, ba = canonical_form(disjoint_union(a, b)), canonical_form(disjoint_union(b, a))
    assert ab.graph == ba.graph and ab.sign == -ba.sign


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_shuffle_property_on_six_edge_graphs(seed):
    rng = random.Random(seed)
    cell = enumerate_basis(rng.choice([1, 2, 3]), 6)
    g = rng.choice(cell.graphs)
    h, sign = shuffle_graph(g, rng)
    cf = canonical_form(h)
    assert cf.graph == canonical_form(g).graph
    assert cf.sign == sign * canonical_form(g).sign
