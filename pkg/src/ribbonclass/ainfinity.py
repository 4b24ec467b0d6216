"""Minimal symplectic A-infinity algebras given by cyclic odd tensors.

The data live on the parity-shifted space ``PiU``: a super basis, an even
graded-skew nondegenerate pairing ``G`` and odd cyclically invariant tensors
``h_k`` (``k >= 3``) stored as coefficient maps on basis index tuples.
The Hamiltonian ``h'`` is the cyclic word ``sum_k h_k / k`` written in the
dual letters, whose pairing is ``G^{-1}``; the norm of ``h'`` gives back
``h_k``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .cyclic_lie import CyclicWord, LetterSpace, bracket
from .super_core import (
    GradedTensor,
    InnerProduct,
    SuperSpace,
    cyclic_perm,
    darboux_basis,
    format_rational,
    inverse_pairing,
    parse_rational,
    permute_tensor,
)

__all__ = [
    "AInfinityAlgebra",
    "FrobeniusInput",
    "ValidationReport",
    "HamiltonianData",
    "build_from_frobenius",
    "validate",
    "check_master_equation",
    "direct_sum",
    "hamiltonian_coordinates",
    "builtin",
    "load_algebra",
    "dump_algebra",
    "BUILTINS",
    "zero_algebra",
    "perturbed_dual",
]


@dataclass(frozen=True)
class AInfinityAlgebra:
    space: SuperSpace
    form: InnerProduct
    h: Mapping[int, GradedTensor] = field(default_factory=dict)
    name: str = ""

    @property
    def dim(self) -> int:
        return self.space.dim

    def tensor(self, k: int) -> GradedTensor:
        t = self.h.get(k)
        if t is None:
            return GradedTensor(self.space.parities, k, {}, 1)
        return t

    @property
    def max_arity(self) -> int:
        return max((k for k, t in self.h.items() if not t.is_zero()), default=0)

    def inverse_form(self) -> InnerProduct:
        return inverse_pairing(self.form)


@dataclass(frozen=True)
class FrobeniusInput:
    """Associative algebra ``U`` on an even basis with an invariant pairing.

    ``product[(a, b)]`` maps output basis indices to structure constants and
    ``pairing`` is the matrix of the trace pairing ``<e_a, e_b>``.
    """

    labels: tuple[str, ...]
    product: Mapping[tuple[int, int], Mapping[int, Fraction]]
    pairing: tuple[tuple[Fraction, ...], ...]

    def multiply(self, a: Mapping[int, Fraction], b: Mapping[int, Fraction]) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for i, ca in a.items():
            for j, cb in b.items():
                for k, c in self.product.get((i, j), {}).items():
                    out[k] = out.get(k, Fraction(0)) + ca * cb * c
        return {k: v for k, v in out.items() if v}

    def is_associative(self) -> bool:
        n = len(self.labels)
        for a, b, c in itertools.product(range(n), repeat=3):
            left = self.multiply(self.multiply({a: Fraction(1)}, {b: Fraction(1)}), {c: Fraction(1)})
            right = self.multiply({a: Fraction(1)}, self.multiply({b: Fraction(1)}, {c: Fraction(1)}))
            if left != right:
                return False
        return True

    def pair_vectors(self, u: Mapping[int, Fraction], v: Mapping[int, Fraction]) -> Fraction:
        return sum((cu * cv * self.pairing[i][j] for i, cu in u.items() for j, cv in v.items()), Fraction(0))

    def is_invariant(self) -> bool:
        n = len(self.labels)
        for a, b, c in itertools.product(range(n), repeat=3):
            ab = self.multiply({a: Fraction(1)}, {b: Fraction(1)})
            bc = self.multiply({b: Fraction(1)}, {c: Fraction(1)})
            if self.pair_vectors(ab, {c: Fraction(1)}) != self.pair_vectors({a: Fraction(1)}, bc):
                return False
        return True


def build_from_frobenius(f: FrobeniusInput, name: str = "", check: bool = True) -> AInfinityAlgebra:
    """Cyclic cubic tensor ``h_3(a, b, c) = <ab, c>`` on the odd shifted space.

    With every vector of ``PiU`` odd, the shifted trace form stays symmetric
    (hence graded-skew) and rotating three odd slots costs no sign, so
    ``h_3`` is cyclic exactly when the pairing is invariant.
    """
    if check:
        if not f.is_associative():
            raise ValueError("multiplication is not associative")
        if not f.is_invariant():
            raise ValueError("pairing is not invariant")
    n = len(f.labels)
    labels = tuple(f"x{i + 1}" for i in range(n)) if n else ()
    space = SuperSpace(labels, (1,) * n)
    form = InnerProduct(space, f.pairing)
    coeffs = {}
    for a, b, c in itertools.product(range(n), repeat=3):
        v = f.pair_vectors(f.multiply({a: Fraction(1)}, {b: Fraction(1)}), {c: Fraction(1)})
        if v:
            coeffs[(a, b, c)] = v
    h3 = GradedTensor(space.parities, 3, coeffs, 1)
    return AInfinityAlgebra(space, form, {3: h3} if n else {}, name)


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[tuple[str, bool, str], ...]

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self) -> list[str]:
        return [f"{name}: {msg}" for name, passed, msg in self.checks if not passed]


def validate(A: AInfinityAlgebra) -> ValidationReport:
    checks = []
    g = A.form
    checks.append(("pairing-even", g.is_even(), "pairing mixes parities"))
    checks.append(("pairing-graded-skew", g.is_graded_skew(), "pairing is not graded-skew"))
    checks.append(("pairing-nondegenerate", g.is_nondegenerate(), "pairing is degenerate"))
    for k in sorted(A.h):
        t = A.h[k]
        checks.append((f"h{k}-arity", k >= 3, "arity below 3"))
        checks.append((f"h{k}-odd", t.is_zero() or t.parity == 1, "tensor is not odd"))
        cyclic = permute_tensor(cyclic_perm(k), t) == t
        checks.append((f"h{k}-cyclic", cyclic, "tensor is not cyclically invariant"))
    return ValidationReport(tuple(checks))


# ---------------------------------------------------------------- Hamiltonian


@dataclass(frozen=True)
class HamiltonianData:
    """``h'`` in Darboux letters, with the change of basis used.

    ``dual_to_letters[a]`` expresses dual basis vector ``a`` in the Darboux
    letters; ``normalized`` is False when the raw dual basis was kept.
    """

    letters: LetterSpace
    h: CyclicWord
    dual_to_letters: tuple[dict[int, Fraction], ...]
    normalized: bool


def _invert_matrix(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    from .super_core import _invert

    return _invert(rows)


def hamiltonian_coordinates(A: AInfinityAlgebra, normalize: bool = True) -> HamiltonianData:
    """Rewrite ``sum_k h_k / k`` as cyclic words in Darboux letters for ``G^{-1}``."""
    H = A.inverse_form()
    n = A.dim
    if normalize and n:
        result = darboux_basis(H)
        letters = LetterSpace.symplectic(result.space.hyperbolic, result.space.odd_count, result.residual)
        # columns of change are new letters in old coordinates; invert to express old in new
        inv = _invert_matrix(result.change)
        dual_to = tuple({c: inv[c][a] for c in range(n) if inv[c][a]} for a in range(n))
    else:
        letters = LetterSpace(H)
        dual_to = tuple({a: Fraction(1)} for a in range(n))
    h = CyclicWord(letters)
    for k, t in sorted(A.h.items()):
        for idx, c in t.coeffs.items():
            for combo in itertools.product(*(dual_to[a].items() for a in idx)):
                coeff = c / k
                for _, v in combo:
                    coeff *= v
                h.add(tuple(x for x, _ in combo), coeff)
    return HamiltonianData(letters, h, dual_to, normalize and bool(n))


def check_master_equation(A: AInfinityAlgebra, normalize: bool = True) -> CyclicWord:
    """Return ``{h', h'}``; it vanishes exactly for A-infinity structures."""
    data = hamiltonian_coordinates(A, normalize)
    return bracket(data.h, data.h)


# ---------------------------------------------------------------- direct sums


def direct_sum(A: AInfinityAlgebra, B: AInfinityAlgebra, name: str = "") -> AInfinityAlgebra:
    na, nb = A.dim, B.dim
    labels = tuple(f"a.{l}" for l in A.space.labels) + tuple(f"b.{l}" for l in B.space.labels)
    space = SuperSpace(labels, A.space.parities + B.space.parities)
    mat = [[Fraction(0)] * (na + nb) for _ in range(na + nb)]
    for i in range(na):
        for j in range(na):
            mat[i][j] = A.form.matrix[i][j]
    for i in range(nb):
        for j in range(nb):
            mat[na + i][na + j] = B.form.matrix[i][j]
    form = InnerProduct(space, mat)
    h = {}
    for k in sorted(set(A.h) | set(B.h)):
        coeffs = dict(A.tensor(k).coeffs)
        for idx, c in B.tensor(k).coeffs.items():
            coeffs[tuple(na + i for i in idx)] = c
        h[k] = GradedTensor(space.parities, k, coeffs, 1)
    return AInfinityAlgebra(space, form, h, name or f"{A.name}+{B.name}")


# ---------------------------------------------------------------- built-ins and files


def _ground() -> AInfinityAlgebra:
    f = FrobeniusInput(("u",), {(0, 0): {0: Fraction(1)}}, ((Fraction(1),),))
    return build_from_frobenius(f, "ground")


def _dual_numbers_input(perturb: Fraction = Fraction(0)) -> FrobeniusInput:
    # basis 1, t with t*t = 0; trace picks the t coefficient
    product = {
        (0, 0): {0: Fraction(1)},
        (0, 1): {1: Fraction(1)},
        (1, 0): {1: Fraction(1)},
    }
    if perturb:
        # adds perturb to <1.t, t> and its rotations, keeping the pairing invariant
        product[(0, 1)] = {0: perturb, 1: Fraction(1)}
        product[(1, 0)] = {0: perturb, 1: Fraction(1)}
        product[(1, 1)] = {1: perturb}
    pairing = ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)))
    return FrobeniusInput(("1", "t"), product, pairing)


def _dual() -> AInfinityAlgebra:
    return build_from_frobenius(_dual_numbers_input(), "dual")


def zero_algebra() -> AInfinityAlgebra:
    space = SuperSpace((), ())
    return AInfinityAlgebra(space, InnerProduct(space, []), {}, "zero")


def perturbed_dual(perturb: Fraction) -> AInfinityAlgebra:
    """Dual numbers with a cyclic but non-associative deformation of size ``perturb``.

    The pairing stays invariant, so the tensor is still cyclic; the product is
    not associative, which the master equation detects.
    """
    return build_from_frobenius(_dual_numbers_input(perturb), f"dual-perturbed({perturb})", check=False)


def _ground_plus_ground() -> AInfinityAlgebra:
    return direct_sum(_ground(), _ground(), "ground+ground")


BUILTINS = {
    "ground": _ground,
    "dual": _dual,
    "ground+ground": _ground_plus_ground,
    "zero": zero_algebra,
}


def builtin(name: str) -> AInfinityAlgebra:
    key = name.split(":", 1)[1] if name.startswith("builtin:") else name
    try:
        return BUILTINS[key]()
    except KeyError:
        raise ValueError(f"unknown built-in algebra {name!r}") from None


def _parse_index_word(labels: Sequence[str], text: str) -> tuple[int, ...]:
    index = {l: i for i, l in enumerate(labels)}
    try:
        return tuple(index[tok] for tok in text.split())
    except KeyError as exc:
        raise ValueError(f"unknown basis label {exc.args[0]!r}") from None


def load_algebra(source: str | Path) -> AInfinityAlgebra:
    """Load ``builtin:NAME`` or a JSON ``.alg`` description.

    Either ``{"frobenius": {"basis": [...], "product": [[a, b, c, coef]...],
    "pairing": [[a, b, coef]...]}}`` or ``{"basis": [...], "parities": [...],
    "pairing": [[a, b, coef]...], "h": {"3": [["a b c", coef]...]}}``.
    """
    text = str(source)
    if text.startswith("builtin:"):
        return builtin(text)
    path = Path(source)
    doc = json.loads(path.read_text(encoding="utf-8"))
    name = doc.get("name", path.stem)
    if "frobenius" in doc:
        fr = doc["frobenius"]
        labels = tuple(fr["basis"])
        n = len(labels)
        product: dict[tuple[int, int], dict[int, Fraction]] = {}
        for a, b, c, coef in fr["product"]:
            ia, ib, ic = (_parse_index_word(labels, x)[0] for x in (a, b, c))
            product.setdefault((ia, ib), {})
            product[(ia, ib)][ic] = product[(ia, ib)].get(ic, Fraction(0)) + parse_rational(coef)
        mat = [[Fraction(0)] * n for _ in range(n)]
        for a, b, coef in fr["pairing"]:
            mat[_parse_index_word(labels, a)[0]][_parse_index_word(labels, b)[0]] = parse_rational(coef)
        return build_from_frobenius(FrobeniusInput(labels, product, tuple(tuple(r) for r in mat)), name)
    labels = tuple(doc["basis"])
    parities = tuple(int(p) for p in doc["parities"])
    space = SuperSpace(labels, parities)
    n = len(labels)
    mat = [[Fraction(0)] * n for _ in range(n)]
    for a, b, coef in doc["pairing"]:
        mat[_parse_index_word(labels, a)[0]][_parse_index_word(labels, b)[0]] = parse_rational(coef)
    h = {}
    for k_text, entries in doc.get("h", {}).items():
        k = int(k_text)
        coeffs: dict[tuple[int, ...], Fraction] = {}
        for word, coef in entries:
            idx = _parse_index_word(labels, word)
            if len(idx) != k:
                raise ValueError(f"h{k} entry {word!r} has the wrong length")
            coeffs[idx] = coeffs.get(idx, Fraction(0)) + parse_rational(coef)
        h[k] = GradedTensor(parities, k, coeffs)
    return AInfinityAlgebra(space, InnerProduct(space, mat), h, name)


def dump_algebra(A: AInfinityAlgebra) -> str:
    labels = A.space.labels
    doc = {
        "name": A.name,
        "basis": list(labels),
        "parities": list(A.space.parities),
        "pairing": [
            [labels[a], labels[b], format_rational(v)] for (a, b), v in sorted(A.form.sparse().items())
        ],
        "h": {
            str(k): [
                [" ".join(labels[i] for i in idx), format_rational(c)]
                for idx, c in sorted(t.coeffs.items())
            ]
            for k, t in sorted(A.h.items())
        },
    }
    return json.dumps(doc, indent=2)
