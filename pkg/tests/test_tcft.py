from __future__ import annotations

import random

import pytest

from _support import shuffle_legged
from ribbonclass.ainfinity import builtin
from ribbonclass.partition import vertex_data
from ribbonclass.tcft import (
    LeggedChain,
    LeggedRibbonGraph,
    composition_sign,
    correlation,
    correlation_of_representative,
    format_legged,
    glue,
    legged_basis,
    legged_canonical_form,
    legged_coboundary,
    legged_union,
    parse_legged,
    slot_contract,
    star,
    straight_leg,
)

BUILTINS = ["ground", "dual", "ground+ground"]
SHAPES = [(1, 0, 1, 2), (1, 0, 2, 1), (1, 1, 1, 1), (1, 1, 1, 2), (2, 2, 1, 1), (1, 0, 2, 2), (2, 1, 2, 2), (2, 2, 1, 2)]


@pytest.fixture(scope="module")
def basis():
    return {shape: legged_basis(*shape) for shape in SHAPES}


def test_parse_format_roundtrip():
    text = "valences=[3,3]; chords=[(1,4),(2,5)]; in=[3]; out=[6]"
    g = parse_legged(text)
    assert format_legged(g) == text
    assert g.legs == (1, 1) and g.bidegree == (2, 2)
    leg = parse_legged("valences=[]; chords=[]; in=[o1]; out=[i1]")
    assert leg == straight_leg()
    assert format_legged(leg) == "valences=[]; chords=[]; in=[o1]; out=[i1]"


@pytest.mark.parametrize(
    "text",
    [
        "valences=[3]; chords=[]; in=[1]; out=[2]",
        "valences=[2]; chords=[]; in=[1]; out=[2]",
        "valences=[]; chords=[]; in=[o1]; out=[]",
        "garbage",
    ],
)
def test_parse_rejects_bad_literals(text):
    with pytest.raises(ValueError):
        parse_legged(text)


def test_straight_leg_correlation_is_the_form():
    for name in BUILTINS:
        A = builtin(name)
        t = correlation(A, straight_leg())
        assert dict(t.coeffs) == {k: v for k, v in A.form.sparse().items()}


def test_star_correlation_is_the_vertex_tensor():
    A = builtin("dual")
    t = correlation(A, star(2, 1))
    assert dict(t.coeffs) == dict(A.h[3].coeffs)


def test_basis_sizes(basis):
    # a single vertex with k labelled legs has (k - 1)! cyclic orders
    assert len(basis[(1, 0, 1, 2)]) == 2
    assert len(basis[(1, 0, 2, 2)]) == 6
    assert len(legged_basis(1, 0, 1, 3)) == 6
    # one loop at a 4-valent vertex: the outgoing leg sits at one of three places
    assert len(basis[(1, 1, 1, 1)]) == 3
    # two trivalent vertices and one edge leave only four leg slots
    assert legged_basis(2, 1, 1, 2) == []


@pytest.mark.parametrize("name", BUILTINS)
def test_correlation_is_representative_independent(name, basis):
    A = builtin(name)
    rng = random.Random(0)
    for gs in basis.values():
        for g in gs:
            base_rep = correlation_of_representative(g, A)
            base = correlation(A, g)
            for _ in range(3):
                r, sign = shuffle_legged(g, rng)
                cf = legged_canonical_form(r)
                assert cf.graph == g and cf.sign == sign
                assert correlation(A, r) == base.scale(sign)
                # on raw representatives the odd vertex tensors follow the vertex order
                assert correlation_of_representative(r, A) == base_rep.scale(cf.vertex_sign)


def test_negated_flips_correlation():
    A = builtin("ground+ground")
    g = parse_legged("valences=[3,3]; chords=[(1,4),(2,5)]; in=[3]; out=[6]")
    assert correlation(A, g.negated()) == correlation(A, g).scale(-1)


@pytest.mark.parametrize("name", BUILTINS)
def test_coboundary_squares_to_zero_and_kills_correlations(name, basis):
    A = builtin(name)
    data = vertex_data(A)
    form = A.form.sparse()
    for gs in basis.values():
        for g in gs:
            d = legged_coboundary(g)
            assert legged_coboundary(d).is_zero()
            total = {}
            for h, c in d.terms.items():
                for key, v in correlation(data, h, form).coeffs.items():
                    total[key] = total.get(key, 0) + c * v
            assert not any(total.values())


def _composable_pairs(basis):
    singles = [g for gs in basis.values() for g in gs] + [star(1, 1 + 1), straight_leg(), legged_union(straight_leg(), star(1, 2))]
    return [(a, b) for a in singles for b in singles if a.legs[1] == b.legs[0]]


@pytest.mark.parametrize("name", BUILTINS)
def test_glue_matches_slot_contraction(name, basis):
    A = builtin(name)
    kappa = vertex_data(A).pairing
    pairs = _composable_pairs(basis)
    assert len(pairs) >= 20
    for g1, g2 in pairs[:60]:
        glued = glue(g1, g2)
        exact = slot_contract(correlation_of_representative(g1, A), correlation_of_representative(g2, A), kappa)
        assert correlation_of_representative(glued, A) == exact
        lhs = correlation(A, glued)
        rhs = slot_contract(correlation(A, g1), correlation(A, g2), kappa).scale(composition_sign(g1, g2))
        assert lhs == rhs


def test_glue_rejects_mismatched_legs():
    with pytest.raises(ValueError):
        glue(star(1, 2), star(1, 2))


def test_glue_welds_straight_legs():
    g = glue(straight_leg(), straight_leg())
    assert g == straight_leg()
    h = glue(star(1, 1 + 1), legged_union(straight_leg(), straight_leg()))
    assert h.legs == (1, 2) and h.num_edges == 0


def test_glue_chain_is_bilinear():
    a = LeggedChain.of(star(1, 2), 2)
    b = LeggedChain.of(star(2, 1), 3)
    from ribbonclass.tcft import glue_chain

    out = glue_chain(a, b)
    assert len(out.terms) == 1
    (g, c), = out.terms.items()
    assert abs(c) == 6 and g.bidegree == (2, 2)
