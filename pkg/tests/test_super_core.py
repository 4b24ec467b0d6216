from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ribbonclass.super_core import (
    GradedTensor,
    InnerProduct,
    SuperSpace,
    apply_symmetrizer,
    block_permutation,
    cyclic_perm,
    darboux_basis,
    format_rational,
    inverse_pairing,
    koszul_sign,
    parse_rational,
    perm_compose,
    perm_inverse,
    perm_sign,
    permute_tensor,
)

perms = st.integers(1, 6).flatmap(lambda k: st.permutations(list(range(k))))


def test_rational_roundtrip():
    assert parse_rational("-6/4") == Fraction(-3, 2)
    assert parse_rational(" 7 ") == 7
    assert format_rational(Fraction(-3, 2)) == "-3/2"
    assert format_rational(Fraction(4, 2)) == "2"
    with pytest.raises(ValueError):
        parse_rational("")


def test_perm_sign_small():
    assert perm_sign((0, 1, 2)) == 1
    assert perm_sign((1, 0, 2)) == -1
    assert perm_sign((1, 2, 0)) == 1
    assert perm_sign(cyclic_perm(4)) == -1


@given(perms, st.data())
def test_sign_is_a_homomorphism(sigma, data):
    tau = data.draw(st.permutations(list(range(len(sigma)))))
    assert perm_sign(perm_compose(sigma, tau)) == perm_sign(sigma) * perm_sign(tau)
    assert perm_compose(sigma, perm_inverse(sigma)) == tuple(range(len(sigma)))


@given(perms, st.data())
def test_koszul_sign_brute_force(sigma, data):
    par = data.draw(st.lists(st.integers(0, 1), min_size=len(sigma), max_size=len(sigma)))
    inversions = sum(
        1
        for a, b in itertools.combinations(range(len(sigma)), 2)
        if par[a] and par[b] and sigma[a] > sigma[b]
    )
    assert koszul_sign(sigma, par) == (-1) ** inversions


@given(perms, st.data())
def test_koszul_sign_is_multiplicative(sigma, data):
    k = len(sigma)
    tau = data.draw(st.permutations(list(range(k))))
    par = data.draw(st.lists(st.integers(0, 1), min_size=k, max_size=k))
    moved = [0] * k
    for r in range(k):
        moved[tau[r]] = par[r]
    assert koszul_sign(perm_compose(sigma, tau), par) == koszul_sign(sigma, moved) * koszul_sign(tau, par)


def test_all_even_koszul_is_trivial():
    for sigma in itertools.permutations(range(4)):
        assert koszul_sign(sigma, [0, 0, 0, 0]) == 1
        assert koszul_sign(sigma, [1, 1, 1, 1]) == perm_sign(sigma)


def test_block_permutation_swaps_blocks():
    assert block_permutation((1, 0), (2, 1)) == (1, 2, 0)
    assert block_permutation((0, 1), (2, 3)) == tuple(range(5))
    with pytest.raises(ValueError):
        block_permutation((0, 0), (1, 1))


def test_cyclic_norm_is_invariant():
    par = (0, 1, 1)
    t = GradedTensor(par, 3, {(1, 2, 0): 1, (0, 1, 1): Fraction(1, 2)})
    n = apply_symmetrizer("norm", t)
    assert apply_symmetrizer("cyclic", n) == n
    assert apply_symmetrizer("cyclic", t, 3) == t


def test_antisymmetrizer_kills_symmetric_even_tensor():
    t = GradedTensor((0,), 2, {(0, 0): 1})
    assert apply_symmetrizer("antisym", t).is_zero()
    odd = GradedTensor((1,), 2, {(0, 0): 1})
    assert apply_symmetrizer("antisym", odd) == odd.scale(2)


def test_permute_tensor_koszul():
    t = GradedTensor((1, 1), 2, {(0, 1): 1})
    assert permute_tensor((1, 0), t).coeffs == {(1, 0): -1}
    with pytest.raises(ValueError):
        GradedTensor((0, 1), 2, {(0, 1): 1}, parity=0)


def test_canonical_form_properties():
    space = SuperSpace.symplectic(2, 3)
    g = InnerProduct.canonical(space)
    assert g.is_even() and g.is_graded_skew() and g.is_nondegenerate()
    assert g(0, 2) == 1 and g(2, 0) == -1 and g(4, 4) == 1


def _random_form(rng, n, m):
    space = SuperSpace(tuple(f"e{i}" for i in range(2 * n)) + tuple(f"o{i}" for i in range(m)), (0,) * (2 * n) + (1,) * m)
    while True:
        mat = [[Fraction(0)] * (2 * n + m) for _ in range(2 * n + m)]
        for a in range(2 * n):
            for b in range(a + 1, 2 * n):
                v = Fraction(rng.randint(-3, 3))
                mat[a][b], mat[b][a] = v, -v
        for a in range(2 * n, 2 * n + m):
            for b in range(a, 2 * n + m):
                v = Fraction(rng.randint(-3, 3))
                mat[a][b] = mat[b][a] = v
        g = InnerProduct(space, mat)
        if g.is_nondegenerate():
            return g


def test_darboux_on_random_forms():
    import random

    rng = random.Random(3)
    for _ in range(25):
        g = _random_form(rng, rng.randint(0, 2), rng.randint(0, 3))
        res = darboux_basis(g)
        n = res.space.hyperbolic
        target = InnerProduct.canonical(res.space, res.residual)
        assert res.transformed(g) == target
        assert n * 2 + len(res.residual) == g.space.dim
        for d in res.residual:
            assert d.denominator == 1
            # square-free
            assert all(int(abs(d)) % (p * p) for p in range(2, 10))


def test_darboux_reports_non_square_residual():
    space = SuperSpace(("x",), (1,))
    res = darboux_basis(InnerProduct(space, [[Fraction(8, 9)]]))
    assert res.residual == (2,)
    assert not res.exact
    assert darboux_basis(InnerProduct(space, [[Fraction(4, 9)]])).exact


def test_darboux_rejects_bad_forms():
    space = SuperSpace(("a", "b"), (0, 0))
    with pytest.raises(ValueError):
        darboux_basis(InnerProduct(space, [[1, 0], [0, 1]]))
    with pytest.raises(ValueError):
        darboux_basis(InnerProduct(space, [[0, 0], [0, 0]]))


def test_inverse_pairing_is_matrix_inverse():
    space = SuperSpace.symplectic(1, 1)
    g = InnerProduct(space, [[0, 2, 0], [-2, 0, 0], [0, 0, 3]])
    inv = inverse_pairing(g)
    for a in range(3):
        for c in range(3):
            entry = sum(g(a, b) * inv(b, c) for b in range(3))
            assert entry == (1 if a == c else 0)
    assert inv.space.labels[0].endswith("*")


@settings(max_examples=30)
@given(st.integers(2, 6), st.integers(-12, 12))
def test_cyclic_perm_order(k, power):
    p = cyclic_perm(k, power)
    assert p == cyclic_perm(k, power % k)
    q = tuple(range(k))
    for _ in range(k):
        q = perm_compose(cyclic_perm(k), q)
    assert q == tuple(range(k))
