"""The bigraded ribbon graph complex: bases, differentials, pairing, homology, coproduct."""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Iterable, Mapping

import flint

from .ribbon_graph import (
    EMPTY_GRAPH,
    RibbonGraph,
    canonical_form,
    connected_components,
    contract_edge,
    disjoint_union,
    enumerate_ideal_edges,
    expand_ideal_edge,
    iter_perfect_matchings,
)
from .super_core import koszul_sign

__all__ = [
    "GraphChain",
    "BasisCell",
    "canonical_term",
    "connected_classes",
    "enumerate_basis",
    "boundary",
    "coboundary",
    "graph_pairing",
    "differential_matrix",
    "exact_rank",
    "homology_dims",
    "coproduct",
    "cells_in_range",
]


class GraphChain:
    """Finite rational combination of canonical nonzero oriented ribbon graphs."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[RibbonGraph, Fraction | int] | None = None):
        self.terms: dict[RibbonGraph, Fraction] = {}
        for g, c in (terms or {}).items():
            self.add(g, c)

    @classmethod
    def of(cls, graph: RibbonGraph, coeff: Fraction | int = 1) -> "GraphChain":
        out = cls()
        out.add(graph, coeff)
        return out

    def add(self, graph: RibbonGraph, coeff: Fraction | int = 1) -> None:
        """Add ``coeff * graph`` after canonicalization; zero graphs drop out."""
        coeff = Fraction(coeff)
        if not coeff:
            return
        cf = canonical_form(graph)
        if cf.is_zero:
            return
        key = cf.graph
        value = self.terms.get(key, Fraction(0)) + cf.sign * coeff
        if value:
            self.terms[key] = value
        else:
            self.terms.pop(key, None)

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GraphChain) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"GraphChain({len(self.terms)} terms)"

    def coefficient(self, graph: RibbonGraph) -> Fraction:
        cf = canonical_form(graph)
        if cf.is_zero:
            return Fraction(0)
        return cf.sign * self.terms.get(cf.graph, Fraction(0))

    def __add__(self, other: "GraphChain") -> "GraphChain":
        out = GraphChain()
        out.terms = dict(self.terms)
        for g, c in other.terms.items():
            v = out.terms.get(g, Fraction(0)) + c
            if v:
                out.terms[g] = v
            else:
                out.terms.pop(g, None)
        return out

    def scale(self, factor: Fraction | int) -> "GraphChain":
        factor = Fraction(factor)
        out = GraphChain()
        if factor:
            out.terms = {g: c * factor for g, c in self.terms.items()}
        return out

    def __neg__(self) -> "GraphChain":
        return self.scale(-1)

    def __sub__(self, other: "GraphChain") -> "GraphChain":
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.terms

    def union(self, other: "GraphChain") -> "GraphChain":
        """Bilinear extension of disjoint union."""
        out = GraphChain()
        for g, c in self.terms.items():
            for h, d in other.terms.items():
                out.add(disjoint_union(g, h), c * d)
        return out

    def restrict(self, predicate) -> "GraphChain":
        out = GraphChain()
        out.terms = {g: c for g, c in self.terms.items() if predicate(g)}
        return out


def canonical_term(graph: RibbonGraph) -> tuple[RibbonGraph, int] | None:
    """``(key, sign)`` with ``graph = sign * key``, or None for a zero graph."""
    cf = canonical_form(graph)
    if cf.is_zero:
        return None
    return cf.graph, cf.sign


@lru_cache(maxsize=None)
def aut_order(graph: RibbonGraph) -> int:
    return canonical_form(graph).aut_order


# ---------------------------------------------------------------- enumeration


@lru_cache(maxsize=None)
def connected_classes(i: int, j: int) -> tuple[RibbonGraph, ...]:
    """Canonical keys of all connected classes with ``i`` vertices and ``j`` edges.

    Zero graphs are included; they are needed to reach nonzero graphs by
    expansion.  One-vertex classes are chord diagrams up to rotation; the
    others are expansions of connected classes with one vertex fewer.
    """
    if i < 1 or 2 * j < 3 * i:
        return ()
    found: set[RibbonGraph] = set()
    if i == 1:
        for matching in iter_perfect_matchings(range(2 * j)):
            found.add(canonical_form(RibbonGraph((2 * j,), tuple(matching))).graph)
    else:
        for g in connected_classes(i - 1, j - 1):
            for ideal in enumerate_ideal_edges(g):
                found.add(canonical_form(expand_ideal_edge(g, ideal)).graph)
    return tuple(sorted(found))


@dataclass(frozen=True)
class BasisCell:
    """Ordered basis of nonzero classes in bidegree (vertices, edges)."""

    vertices: int
    edges: int
    graphs: tuple[RibbonGraph, ...]
    aut_orders: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.graphs)

    def index(self) -> dict[RibbonGraph, int]:
        return {g: r for r, g in enumerate(self.graphs)}


@lru_cache(maxsize=None)
def _nonzero_connected(i: int, j: int) -> tuple[RibbonGraph, ...]:
    return tuple(g for g in connected_classes(i, j) if not canonical_form(g).is_zero)


def _connected_bidegrees(i: int, j: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(1, i + 1) for b in range(1, j + 1) if 2 * b >= 3 * a]


@lru_cache(maxsize=None)
def enumerate_basis(i: int, j: int, connected_only: bool = False) -> BasisCell:
    """All nonzero classes with ``i`` vertices and ``j`` edges, lexicographically ordered."""
    if i == 0 and j == 0:
        return BasisCell(0, 0, (EMPTY_GRAPH,), (1,))
    if i < 1 or 2 * j < 3 * i:
        return BasisCell(i, j, (), ())
    if connected_only:
        graphs = _nonzero_connected(i, j)
    else:
        found: set[RibbonGraph] = set()
        for profile in _bidegree_multisets(_connected_bidegrees(i, j), i, j):
            choices = []
            for bideg, mult in Counter(profile).items():
                pool = _nonzero_connected(*bideg)
                if mult > 1 and bideg[0] % 2:
                    # two equal odd-vertex components give a zero graph
                    choices.append(list(itertools.combinations(pool, mult)))
                else:
                    choices.append(list(itertools.combinations_with_replacement(pool, mult)))
            for combo in itertools.product(*choices):
                union = EMPTY_GRAPH
                for group in combo:
                    for g in group:
                        union = disjoint_union(union, g)
                cf = canonical_form(union)
                if not cf.is_zero:
                    found.add(cf.graph)
        graphs = tuple(sorted(found))
    return BasisCell(i, j, graphs, tuple(canonical_form(g).aut_order for g in graphs))


def _bidegree_multisets(options, i, j, start=0):
    """Multisets of bidegrees from ``options`` summing to (i, j)."""
    if i == 0 and j == 0:
        yield []
        return
    for idx in range(start, len(options)):
        a, b = options[idx]
        if a <= i and b <= j:
            for rest in _bidegree_multisets(options, i - a, j - b, idx):
                yield [(a, b)] + rest


def cells_in_range(max_edges: int, chi_min: int | None = None) -> list[tuple[int, int]]:
    """Feasible bidegrees with ``1 <= edges <= max_edges`` and ``vertices - edges >= chi_min``."""
    out = []
    for j in range(1, max_edges + 1):
        for i in range(1, (2 * j) // 3 + 1):
            if chi_min is None or i - j >= chi_min:
                out.append((i, j))
    return out


# ---------------------------------------------------------------- differentials


def boundary(x: GraphChain | RibbonGraph) -> GraphChain:
    """Sum of contractions over all non-loop edges."""
    chain = x if isinstance(x, GraphChain) else GraphChain.of(x)
    out = GraphChain()
    for g, c in chain.terms.items():
        for e in range(g.num_edges):
            if not g.is_loop(e):
                out.add(contract_edge(g, e), c)
    return out


def coboundary(x: GraphChain | RibbonGraph) -> GraphChain:
    """Sum of ideal-edge expansions weighted by ``|Aut(expanded)| / |Aut(graph)|``."""
    chain = x if isinstance(x, GraphChain) else GraphChain.of(x)
    out = GraphChain()
    for g, c in chain.terms.items():
        base = aut_order(g)
        for ideal in enumerate_ideal_edges(g):
            h = expand_ideal_edge(g, ideal)
            cf = canonical_form(h)
            if cf.is_zero:
                continue
            out.add(h, c * Fraction(cf.aut_order, base))
    return out


def graph_pairing(x: GraphChain | RibbonGraph, y: GraphChain | RibbonGraph) -> Fraction:
    """Bilinear form making the nonzero canonical classes orthonormal."""
    cx = x if isinstance(x, GraphChain) else GraphChain.of(x)
    cy = y if isinstance(y, GraphChain) else GraphChain.of(y)
    small, large = (cx, cy) if len(cx) <= len(cy) else (cy, cx)
    return sum((c * large.terms.get(g, 0) for g, c in small.terms.items()), Fraction(0))


def differential_matrix(kind: str, i: int, j: int) -> list[dict[int, Fraction]]:
    """Columns (sparse) of ``boundary`` out of cell (i, j), or ``coboundary`` out of it.

    Rows index the target cell: (i-1, j-1) for ``"boundary"``, (i+1, j+1)
    for ``"coboundary"``.
    """
    return [dict(col) for col in _columns(kind, i, j)]


@lru_cache(maxsize=None)
def _columns(kind: str, i: int, j: int) -> tuple[dict[int, Fraction], ...]:
    src = enumerate_basis(i, j)
    if kind == "boundary":
        tgt, op = enumerate_basis(i - 1, j - 1), boundary
    elif kind == "coboundary":
        tgt, op = enumerate_basis(i + 1, j + 1), coboundary
    else:
        raise ValueError(f"unknown differential {kind!r}")
    index = tgt.index()
    cols = []
    for g in src.graphs:
        col = {}
        for h, c in op(g).terms.items():
            if h not in index:
                raise RuntimeError(f"term {h} missing from target basis")
            col[index[h]] = c
        cols.append(col)
    return tuple(cols)


def exact_rank(columns: list[dict[int, Fraction]], nrows: int) -> int:
    """Rank over the rationals of a sparse column list.

    Each column is scaled to integers, which leaves the rank unchanged.
    """
    if not columns or nrows == 0:
        return 0
    m = flint.fmpz_mat(nrows, len(columns))
    for c, col in enumerate(columns):
        scale = lcm(*(Fraction(v).denominator for v in col.values())) if col else 1
        for r, v in col.items():
            if v:
                m[r, c] = int(v * scale)
    return m.rank()


@dataclass(frozen=True)
class HomologyRow:
    chi: int
    vertices: int
    edges: int
    dim: int
    dim_ker: int
    rank_in: int
    dim_h: int


def homology_dims(chi: int, max_edges: int | None = None, kind: str = "boundary") -> list[HomologyRow]:
    """Kernel, image and homology dimensions of the cells with Euler characteristic ``chi``.

    For ``kind="boundary"`` the row for (i, j) records ``dim ker d`` out of
    (i, j) and ``rank d`` into it from (i+1, j+1).  For ``"coboundary"`` the
    roles are mirrored: ``dim ker delta`` out of (i, j) and ``rank delta``
    into it from (i-1, j-1).
    """
    cells = [(i, i - chi) for i in range(1, 64) if 2 * (i - chi) >= 3 * i]
    if max_edges is not None:
        cells = [(i, j) for i, j in cells if j <= max_edges]
    rows = []
    for i, j in cells:
        dim = enumerate_basis(i, j).dim
        if kind == "boundary":
            out_rank = exact_rank(differential_matrix("boundary", i, j), enumerate_basis(i - 1, j - 1).dim)
            in_rank = exact_rank(differential_matrix("boundary", i + 1, j + 1), dim)
        elif kind == "coboundary":
            out_rank = exact_rank(differential_matrix("coboundary", i, j), enumerate_basis(i + 1, j + 1).dim)
            in_rank = exact_rank(differential_matrix("coboundary", i - 1, j - 1), dim)
        else:
            raise ValueError(f"unknown differential {kind!r}")
        ker = dim - out_rank
        rows.append(HomologyRow(chi, i, j, dim, ker, in_rank, ker - in_rank))
    return rows


# ---------------------------------------------------------------- Hopf structure


Tensor2 = dict[tuple[RibbonGraph, RibbonGraph], Fraction]


def _union_all(graphs: Iterable[RibbonGraph]) -> RibbonGraph:
    out = EMPTY_GRAPH
    for g in graphs:
        out = disjoint_union(out, g)
    return out


def _canon_or_none(graph: RibbonGraph):
    cf = canonical_form(graph)
    return None if cf.is_zero else (cf.graph, cf.sign)


def coproduct(x: GraphChain | RibbonGraph) -> Tensor2:
    """Split the component multiset into an ordered pair of parts, in every way."""
    chain = x if isinstance(x, GraphChain) else GraphChain.of(x)
    out: Tensor2 = {}
    for g, c in chain.terms.items():
        comps = connected_components(g)
        comp_sign = canonical_form(_union_all(comps)).sign * canonical_form(g).sign
        parities = [h.num_vertices % 2 for h in comps]
        r = len(comps)
        for mask in range(1 << r):
            left = [t for t in range(r) if mask >> t & 1]
            right = [t for t in range(r) if not mask >> t & 1]
            order = left + right
            perm = [0] * r
            for pos, t in enumerate(order):
                perm[t] = pos
            sign = koszul_sign(perm, parities) * comp_sign
            lt = _canon_or_none(_union_all(comps[t] for t in left))
            rt = _canon_or_none(_union_all(comps[t] for t in right))
            if lt is None or rt is None:
                continue
            key = (lt[0], rt[0])
            val = out.get(key, Fraction(0)) + c * sign * lt[1] * rt[1]
            if val:
                out[key] = val
            else:
                out.pop(key, None)
    return out
