from __future__ import annotations

import random
from fractions import Fraction

import pytest

from _support import brute_automorphisms, shuffle_graph
from ribbonclass.ainfinity import builtin, hamiltonian_coordinates, perturbed_dual
from ribbonclass.cyclic_lie import CyclicWord, LetterSpace, sigma_of_chords
from ribbonclass.graph_complex import GraphChain, cells_in_range, enumerate_basis
from ribbonclass.partition import (
    characteristic_class,
    conjugate_hamiltonian,
    connected_partition_chain,
    exp_chain,
    homotopy_defect_in_image,
    homotopy_trial,
    partition_chain,
    partition_value,
    verify_cycle,
    verify_direct_sum,
    verify_equivalence,
    vertex_data,
    vertex_data_from_hamiltonian,
)
from ribbonclass.ribbon_graph import parse_graph
from ribbonclass.super_core import perm_sign

THETA = parse_graph("valences=[3,3]; chords=[(1,4),(2,5),(3,6)]")
BUILTINS = ["ground", "dual", "ground+ground"]


def _graphs(max_edges):
    return [g for i, j in cells_in_range(max_edges) for g in enumerate_basis(i, j).graphs]


def test_theta_values():
    assert partition_value(builtin("ground"), THETA) == Fraction(-1, 6)
    assert partition_value(builtin("ground+ground"), THETA) == Fraction(-1, 3)
    assert partition_value(builtin("dual"), THETA) == 0
    assert partition_value(builtin("zero"), THETA) == 0


def test_ground_field_closed_form():
    # one odd letter, h3 = 1 and unit pairing: every trivalent graph gives sgn / |Aut|
    A = builtin("ground")
    for g in _graphs(5):
        count, _ = brute_automorphisms(g)
        expected = Fraction(0)
        if set(g.valences) == {3}:
            expected = Fraction(perm_sign(sigma_of_chords(g.chords)), count)
        assert partition_value(A, g) == expected


@pytest.mark.parametrize("name", BUILTINS)
def test_darboux_pipeline_agrees(name):
    A = builtin(name)
    direct = vertex_data(A)
    darboux = vertex_data_from_hamiltonian(hamiltonian_coordinates(A).h)
    for g in _graphs(5):
        assert partition_value(direct, g) == partition_value(darboux, g)


@pytest.mark.parametrize("name", BUILTINS)
def test_representative_independence(name):
    A = builtin(name)
    rng = random.Random(3)
    for g in _graphs(5):
        z = partition_value(A, g)
        for _ in range(2):
            h, sign = shuffle_graph(g, rng)
            assert partition_value(A, h) == sign * z


@pytest.mark.parametrize("name", BUILTINS)
def test_small_identities(name):
    A = builtin(name)
    assert verify_cycle(A, 4).ok
    assert verify_equivalence(A, 4).ok
    full = partition_chain(A, 5).chain
    conn = connected_partition_chain(A, 5).chain
    assert exp_chain(conn, 5) == full
    for g in _graphs(5):
        if g.num_vertices % 2:
            assert partition_value(A, g) == 0


def test_direct_sum_identity_small():
    assert verify_direct_sum(builtin("ground"), builtin("dual"), 4).ok


def test_exp_chain_rejects_disconnected_input():
    with pytest.raises(ValueError):
        exp_chain(GraphChain({g: 1 for g in enumerate_basis(2, 5).graphs}), 5)


def test_characteristic_class_of_ground():
    cls = characteristic_class(builtin("ground"), 2)
    lines = cls.chain.format().splitlines()
    assert lines == ["1 * []", "1/3 * [x1 x1 x1]", "1/18 * [x1 x1 x1 ^ x1 x1 x1]"]
    with pytest.raises(ValueError):
        cls.degree(3)


def test_conjugation_needs_long_generator_words():
    letters = LetterSpace.symplectic(1, 0)
    h = CyclicWord.parse(letters, "p1 p1 q1")
    with pytest.raises(ValueError):
        conjugate_hamiltonian(h, CyclicWord.parse(letters, "p1 q1"), 6)
    moved = conjugate_hamiltonian(h, CyclicWord.parse(letters, "p1 p1 q1 q1"), 4)
    assert moved.by_length(3) == h


def test_homotopy_trial_small():
    trial = homotopy_trial(builtin("ground"), 0, 5)
    assert trial.ok
    assert trial.changed_coordinates == 74
    again = homotopy_trial(builtin("ground"), 0, 5)
    assert again.generator == trial.generator


def test_homotopy_negative_control():
    # doubling the algebra changes Z by something that is not a boundary
    result = homotopy_defect_in_image(builtin("ground"), builtin("ground+ground"), 4)
    assert result[(2, 3)] is False


def test_perturbation_breaks_cycle_condition():
    report = verify_cycle(perturbed_dual(Fraction(1)), 4)
    assert not report.ok
