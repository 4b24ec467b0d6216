"""Partition functions, their exponential relation and characteristic classes."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Sequence

from .ainfinity import AInfinityAlgebra, hamiltonian_coordinates
from .cyclic_lie import (
    CEChain,
    CyclicWord,
    LetterSpace,
    bracket,
    contract,
    feynman_oriented,
    norm_rotations,
    stable_product,
)
from .graph_complex import (
    GraphChain,
    cells_in_range,
    coboundary,
    differential_matrix,
    enumerate_basis,
    exact_rank,
)
from .ribbon_graph import EMPTY_GRAPH, RibbonGraph, canonical_form, is_connected

__all__ = [
    "VertexData",
    "PartitionChain",
    "CharacteristicClass",
    "EquivalenceReport",
    "vertex_data",
    "vertex_data_from_hamiltonian",
    "partition_value",
    "partition_on_chain",
    "partition_chain",
    "connected_partition_chain",
    "exp_chain",
    "characteristic_class",
    "verify_equivalence",
    "verify_direct_sum",
    "verify_cycle",
    "conjugate_hamiltonian",
    "random_even_hamiltonian",
    "homotopy_defect_in_image",
    "HomotopyTrial",
    "homotopy_trial",
]


@dataclass(frozen=True)
class VertexData:
    """Per-arity vertex tensors with the pairing used along edges."""

    blocks: Mapping[int, tuple[tuple[tuple[int, ...], Fraction], ...]]
    pairing: Mapping[tuple[int, int], Fraction]
    parities: tuple[int, ...]


def vertex_data(A: AInfinityAlgebra) -> VertexData:
    """Tensors ``h_k`` contracted with the inverse pairing ``G^{-1}``."""
    blocks = {k: tuple(sorted(t.coeffs.items())) for k, t in A.h.items()}
    return VertexData(blocks, A.inverse_form().sparse(), A.space.parities)


def vertex_data_from_hamiltonian(h: CyclicWord) -> VertexData:
    """Tensors ``N . h'_k`` on the letters of ``h``, contracted with their pairing."""
    par = h.letters.parities
    acc: dict[int, dict[tuple[int, ...], Fraction]] = {}
    for w, c in h.terms.items():
        k = len(w)
        bucket = acc.setdefault(k, {})
        for rot, s in norm_rotations(w, par):
            bucket[rot] = bucket.get(rot, Fraction(0)) + s * c
    blocks = {k: tuple(sorted((w, c) for w, c in b.items() if c)) for k, b in acc.items()}
    return VertexData(blocks, h.letters.pair, par)


def _data(source: AInfinityAlgebra | VertexData) -> VertexData:
    return source if isinstance(source, VertexData) else vertex_data(source)


def partition_value(source: AInfinityAlgebra | VertexData, graph: RibbonGraph) -> Fraction:
    """State sum of ``graph`` divided by its automorphism count.

    Any fully ordered representative may be passed; the value transforms
    with the orientation sign.
    """
    data = _data(source)
    if not graph.valences:
        return Fraction(1)
    cf = canonical_form(graph)
    if cf.is_zero:
        return Fraction(0)
    blocks = [data.blocks.get(k, ()) for k in graph.valences]
    if any(not b for b in blocks):
        return Fraction(0)
    return contract(graph, blocks, data.pairing, data.parities) / cf.aut_order


def partition_on_chain(source: AInfinityAlgebra | VertexData, chain: GraphChain) -> Fraction:
    data = _data(source)
    return sum((c * partition_value(data, g) for g, c in chain.terms.items()), Fraction(0))


@dataclass
class PartitionChain:
    """Coefficients ``Z(graph)`` on every basis graph up to ``max_edges`` edges."""

    chain: GraphChain
    max_edges: int
    algebra: str = ""
    connected_only: bool = False


def _basis_graphs(max_edges: int, connected_only: bool) -> Iterable[RibbonGraph]:
    yield EMPTY_GRAPH
    for i, j in cells_in_range(max_edges):
        yield from enumerate_basis(i, j, connected_only).graphs


def partition_chain(source: AInfinityAlgebra | VertexData, max_edges: int, name: str = "") -> PartitionChain:
    data = _data(source)
    chain = GraphChain()
    for g in _basis_graphs(max_edges, False):
        v = partition_value(data, g)
        if v:
            chain.terms[g] = v
    if not name and isinstance(source, AInfinityAlgebra):
        name = source.name
    return PartitionChain(chain, max_edges, name)


def connected_partition_chain(source: AInfinityAlgebra | VertexData, max_edges: int, name: str = "") -> PartitionChain:
    data = _data(source)
    chain = GraphChain()
    for i, j in cells_in_range(max_edges):
        for g in enumerate_basis(i, j, True).graphs:
            v = partition_value(data, g)
            if v:
                chain.terms[g] = v
    if not name and isinstance(source, AInfinityAlgebra):
        name = source.name
    return PartitionChain(chain, max_edges, name, connected_only=True)


def _truncate(chain: GraphChain, max_edges: int) -> GraphChain:
    return chain.restrict(lambda g: g.num_edges <= max_edges)


def exp_chain(x: PartitionChain | GraphChain, max_edges: int) -> GraphChain:
    """``sum_n x^n / n!`` under disjoint union, dropping terms above ``max_edges`` edges."""
    base = x.chain if isinstance(x, PartitionChain) else x
    if any(not is_connected(g) or not g.valences for g in base.terms):
        raise ValueError("exp_chain expects a combination of nonempty connected graphs")
    out = GraphChain.of(EMPTY_GRAPH)
    power = GraphChain.of(EMPTY_GRAPH)
    n = 0
    while True:
        n += 1
        power = _truncate(power.union(base), max_edges)
        if power.is_zero():
            break
        out = out + power.scale(Fraction(1, factorial(n)))
    return out


# ---------------------------------------------------------------- classes


@dataclass(frozen=True)
class CharacteristicClass:
    """Partial sums of ``exp(h')`` through exterior degree ``bound``."""

    chain: CEChain
    bound: int
    hamiltonian: CyclicWord

    def degree(self, m: int) -> CEChain:
        if m > self.bound:
            raise ValueError(f"degree {m} is beyond the truncation bound {self.bound}")
        return self.chain.degree_part(m)


def _exp_wedge(h: CyclicWord, bound: int) -> CEChain:
    letters = h.letters
    out = CEChain.one(letters)
    if h.is_zero():
        return out
    single = CEChain.wedge(h)
    power = CEChain.one(letters)
    for m in range(1, bound + 1):
        power = power ^ single
        out = out + power.scale(Fraction(1, factorial(m)))
    return out


def characteristic_class(source: AInfinityAlgebra | CyclicWord, degree_bound: int) -> CharacteristicClass:
    h = source if isinstance(source, CyclicWord) else hamiltonian_coordinates(source).h
    return CharacteristicClass(_exp_wedge(h, degree_bound), degree_bound, h)


# ---------------------------------------------------------------- verification


@dataclass
class EquivalenceReport:
    checked: int = 0
    failures: list[tuple[RibbonGraph, Fraction, Fraction]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_equivalence(A: AInfinityAlgebra, max_edges: int) -> EquivalenceReport:
    """Compare the amplitude of ``c_A`` with ``|Aut| * Z_A`` on every basis graph."""
    data = vertex_data(A)
    bound = max(2 * max_edges // 3, 1)
    cls = characteristic_class(A, bound)
    report = EquivalenceReport()
    for g in _basis_graphs(max_edges, False):
        cf = canonical_form(g)
        lhs = feynman_oriented(g, cls.degree(g.num_vertices)) if g.valences else Fraction(1)
        rhs = cf.aut_order * partition_value(data, g)
        report.checked += 1
        if lhs != rhs:
            report.failures.append((g, lhs, rhs))
    return report


def verify_direct_sum(A: AInfinityAlgebra, B: AInfinityAlgebra, max_edges: int) -> EquivalenceReport:
    """Pair the class of ``A + B`` and the stable product of the two classes with every graph."""
    from .ainfinity import direct_sum

    bound = max(2 * max_edges // 3, 1)
    sum_cls = characteristic_class(direct_sum(A, B), bound)
    ca = characteristic_class(A, bound)
    cb = characteristic_class(B, bound)
    report = EquivalenceReport()
    for g in _basis_graphs(max_edges, False):
        if not g.valences:
            continue
        m = g.num_vertices
        lhs = feynman_oriented(g, sum_cls.degree(m))
        rhs = Fraction(0)
        for a in range(m + 1):
            prod = stable_product(ca.degree(a), cb.degree(m - a))
            rhs += feynman_oriented(g, prod)
        report.checked += 1
        if lhs != rhs:
            report.failures.append((g, lhs, rhs))
    return report


def verify_cycle(source: AInfinityAlgebra | VertexData, max_edges: int, chi_min: int | None = None) -> EquivalenceReport:
    """Check ``Z(coboundary(graph)) = 0`` on every basis graph in range."""
    data = _data(source)
    report = EquivalenceReport()
    for i, j in cells_in_range(max_edges, chi_min):
        for g in enumerate_basis(i, j).graphs:
            value = partition_on_chain(data, coboundary(g))
            report.checked += 1
            if value:
                report.failures.append((g, value, Fraction(0)))
    return report


# ---------------------------------------------------------------- homotopy


def conjugate_hamiltonian(h: CyclicWord, g: CyclicWord, max_length: int) -> CyclicWord:
    """``exp(ad_g) h`` keeping words of length at most ``max_length``.

    ``g`` must be even with every word of length at least 3, so each bracket
    lengthens words and the series stops.
    """
    if any(len(w) < 3 for w in g.terms):
        raise ValueError("the generating Hamiltonian needs words of length at least 3")
    out = h.truncate(max_length)
    term = out
    n = 0
    while not term.is_zero():
        n += 1
        term = bracket(g, term).truncate(max_length).scale(Fraction(1, n))
        out = out + term
    return out


def random_even_hamiltonian(letters: LetterSpace, rng: random.Random, lengths=(3, 4), terms: int = 3) -> CyclicWord:
    """A random nonzero even combination of words with the given lengths."""
    par = letters.parities
    n = len(par)
    while True:
        g = CyclicWord(letters)
        for _ in range(terms):
            k = rng.choice(lengths)
            word = tuple(rng.randrange(n) for _ in range(k))
            if sum(par[a] for a in word) % 2 == 0:
                g.add(word, Fraction(rng.randint(-3, 3), rng.randint(1, 3)))
        if not g.is_zero():
            return g


def homotopy_defect_in_image(
    before: AInfinityAlgebra | VertexData,
    after: AInfinityAlgebra | VertexData,
    max_edges: int,
) -> dict[tuple[int, int], bool]:
    """For each cell, whether ``Z_after - Z_before`` lies in the image of the boundary."""
    d0, d1 = _data(before), _data(after)
    result = {}
    for i, j in cells_in_range(max_edges):
        cell = enumerate_basis(i, j)
        defect = {r: partition_value(d1, g) - partition_value(d0, g) for r, g in enumerate(cell.graphs)}
        defect = {r: v for r, v in defect.items() if v}
        if not defect:
            result[(i, j)] = True
            continue
        cols = differential_matrix("boundary", i + 1, j + 1)
        base = exact_rank(cols, cell.dim)
        result[(i, j)] = exact_rank(cols + [defect], cell.dim) == base
    return result


@dataclass
class HomotopyTrial:
    """One seeded conjugation and, per cell, whether the change of ``Z`` is a boundary."""

    seed: int
    generator: CyclicWord
    changed_coordinates: int
    in_image: dict[tuple[int, int], bool]

    @property
    def ok(self) -> bool:
        return all(self.in_image.values())


def homotopy_trial(
    source: AInfinityAlgebra | CyclicWord,
    seed: int,
    max_edges: int,
    extra_odd: int = 1,
    lengths: Sequence[int] = (4,),
    terms: int = 2,
) -> HomotopyTrial:
    """Conjugate ``h'`` by ``exp(ad_g)`` for a seeded random ``g`` and test the change of ``Z``.

    The letters are padded by ``extra_odd`` self-paired odd letters so that
    nontrivial generators exist.  Generators whose conjugation leaves
    ``h'`` unchanged are redrawn.  Words longer than ``2 * max_edges`` never
    reach a graph in range and are dropped.
    """
    h = source if isinstance(source, CyclicWord) else hamiltonian_coordinates(source).h
    big, left, _ = h.letters.stable_embedding(LetterSpace.symplectic(0, extra_odd))
    h = h.relabel(big, left)
    rng = random.Random(seed)
    bound = 2 * max_edges
    base = h.truncate(bound)
    for _ in range(1000):
        g = random_even_hamiltonian(big, rng, lengths, terms)
        moved = conjugate_hamiltonian(h, g, bound)
        if (moved - base).terms:
            break
    else:
        raise RuntimeError("no generator moved the Hamiltonian")
    d0, d1 = vertex_data_from_hamiltonian(base), vertex_data_from_hamiltonian(moved)
    changed = 0
    for i, j in cells_in_range(max_edges):
        for graph in enumerate_basis(i, j).graphs:
            if partition_value(d0, graph) != partition_value(d1, graph):
                changed += 1
    return HomotopyTrial(seed, g, changed, homotopy_defect_in_image(d0, d1, max_edges))
