from __future__ import annotations

import json
from fractions import Fraction

import pytest

from ribbonclass.ainfinity import (
    BUILTINS,
    FrobeniusInput,
    build_from_frobenius,
    builtin,
    check_master_equation,
    direct_sum,
    dump_algebra,
    hamiltonian_coordinates,
    load_algebra,
    perturbed_dual,
    validate,
)


def _matrix_algebra(n):
    labels = tuple(f"e{i}{j}" for i in range(n) for j in range(n))
    idx = {(i, j): r for r, (i, j) in enumerate((i, j) for i in range(n) for j in range(n))}
    product = {}
    for (i, j), a in idx.items():
        for (k, l), b in idx.items():
            if j == k:
                product[(a, b)] = {idx[(i, l)]: Fraction(1)}
    # trace pairing tr(e_ij e_kl) = [j == k][i == l]
    pairing = tuple(
        tuple(Fraction(int(j == k and i == l)) for (k, l) in idx) for (i, j) in idx
    )
    return FrobeniusInput(labels, product, pairing)


def _cyclic_group_algebra(n):
    labels = tuple(f"g{i}" for i in range(n))
    product = {(a, b): {(a + b) % n: Fraction(1)} for a in range(n) for b in range(n)}
    pairing = tuple(tuple(Fraction(int((a + b) % n == 0)) for b in range(n)) for a in range(n))
    return FrobeniusInput(labels, product, pairing)


@pytest.mark.parametrize("name", ["ground", "dual", "ground+ground", "zero"])
def test_builtins_validate_and_solve_master_equation(name):
    A = builtin(name)
    assert validate(A).ok
    assert check_master_equation(A).is_zero()


def test_builtin_prefix_and_unknown():
    assert builtin("builtin:dual").name == "dual"
    with pytest.raises(ValueError):
        builtin("nope")
    assert set(BUILTINS) == {"ground", "dual", "ground+ground", "zero"}


def test_ground_hamiltonian():
    data = hamiltonian_coordinates(builtin("ground"))
    assert data.h.format() == "1/3 * [x1 x1 x1]"
    assert data.normalized


def test_dual_hamiltonian_in_diagonal_letters():
    data = hamiltonian_coordinates(builtin("dual"))
    # the inverse trace form on {1, t} is diagonalised to (1, -1), and -1 is not a square
    assert data.letters.odd_diagonal == (1, -1)
    assert data.h.format() == "1/4 * [x1 x1 x1] + -1/4 * [x1 x1 x2] + -1/4 * [x1 x2 x2] + 1/4 * [x2 x2 x2]"


def test_perturbed_dual_breaks_master_equation():
    A = perturbed_dual(Fraction(1))
    assert validate(A).ok  # still cyclic
    assert not check_master_equation(A).is_zero()
    assert check_master_equation(perturbed_dual(Fraction(0))).is_zero()


@pytest.mark.parametrize("algebra", [_matrix_algebra(2), _cyclic_group_algebra(3)])
def test_frobenius_algebras_solve_master_equation(algebra):
    A = build_from_frobenius(algebra, "f")
    assert validate(A).ok
    assert check_master_equation(A).is_zero()
    assert check_master_equation(A, normalize=False).is_zero()


def test_frobenius_checks_reject_bad_input():
    bad = FrobeniusInput(("a", "b"), {(0, 0): {1: Fraction(1)}, (1, 1): {0: Fraction(1)}}, ((1, 0), (0, 1)))
    with pytest.raises(ValueError):
        build_from_frobenius(bad)
    non_invariant = FrobeniusInput(("1", "t"), {(0, 0): {0: Fraction(1)}, (0, 1): {1: Fraction(1)}, (1, 0): {1: Fraction(1)}}, ((1, 0), (0, 1)))
    assert non_invariant.is_associative()
    with pytest.raises(ValueError):
        build_from_frobenius(non_invariant)


def test_direct_sum_blocks():
    A = direct_sum(builtin("ground"), builtin("dual"))
    assert A.dim == 3
    assert A.space.labels[0] == "a.x1"
    assert A.form(0, 1) == 0 and A.form(1, 2) == 1
    assert check_master_equation(A).is_zero()


def test_dump_load_roundtrip(tmp_path):
    for name in ["ground", "dual", "ground+ground"]:
        A = builtin(name)
        path = tmp_path / f"{name}.alg"
        path.write_text(dump_algebra(A))
        B = load_algebra(path)
        assert B.form == A.form
        assert {k: t.coeffs for k, t in B.h.items()} == {k: t.coeffs for k, t in A.h.items()}


def test_load_frobenius_document(tmp_path):
    doc = {
        "name": "dual-file",
        "frobenius": {
            "basis": ["1", "t"],
            "product": [["1", "1", "1", 1], ["1", "t", "t", 1], ["t", "1", "t", 1]],
            "pairing": [["1", "t", 1], ["t", "1", 1]],
        },
    }
    path = tmp_path / "dual.alg"
    path.write_text(json.dumps(doc))
    A = load_algebra(path)
    assert A.name == "dual-file"
    assert dict(A.h[3].coeffs) == dict(builtin("dual").h[3].coeffs)


def test_load_rejects_wrong_arity(tmp_path):
    doc = {"basis": ["x"], "parities": [1], "pairing": [["x", "x", 1]], "h": {"3": [["x x", 1]]}}
    path = tmp_path / "bad.alg"
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load_algebra(path)


def test_validation_flags_non_cyclic_tensor(tmp_path):
    doc = {
        "basis": ["x", "y"],
        "parities": [1, 1],
        "pairing": [["x", "x", 1], ["y", "y", 1]],
        "h": {"3": [["x x y", 1]]},
    }
    path = tmp_path / "nc.alg"
    path.write_text(json.dumps(doc))
    report = validate(load_algebra(path))
    assert not report.ok
    assert any("cyclic" in f for f in report.failures())
