"""Ribbon graphs with legs, gluing and correlation tensors.

A :class:`LeggedRibbonGraph` extends the fully ordered storage of
:class:`~ribbonclass.ribbon_graph.RibbonGraph` with labelled legs.  Internal
vertices own consecutive blocks of positions.  Every position is either an
end of an internal edge (a chord ``(tail, head)``) or the attachment point of
one leg.  ``ins[i]`` and ``outs[k]`` give the position each leg is attached
to; a leg running straight from incoming leg ``i`` to outgoing leg ``k``
without touching a vertex is stored as ``ins[i] = -(k + 1)`` and
``outs[k] = -(i + 1)``.

Orientation convention for legged graphs: an ordering of the internal edges
together with a direction of each internal edge, modulo even changes.  An
isomorphism therefore acts by

    sgn(internal edge permutation) * (-1) ** (number of reversed edges).

Leg labels are rigid.  Vertex order and the starting point of each cyclic
order carry no orientation data here.

The scalar graphs of :mod:`ribbonclass.ribbon_graph` use the vertex-order
convention instead.  The two are compared only through canonical
representatives: :attr:`LeggedCanonicalForm.vertex_sign` records the sign of
the same representative change under the vertex-order convention, and
:func:`legged_coboundary` transports the vertex-expansion differential along
that identification.

Literal format (1-based positions)::

    valences=[3,3]; chords=[(1,4),(2,5)]; in=[3]; out=[6]

A straight leg is written ``o2`` in the ``in`` list and ``i1`` in the ``out``
list.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Sequence

from .ainfinity import AInfinityAlgebra
from .partition import VertexData, vertex_data
from .ribbon_graph import IdealEdge
from .super_core import koszul_sign, perm_sign

__all__ = [
    "LeggedRibbonGraph",
    "LeggedCanonicalForm",
    "LeggedChain",
    "CorrelationTensor",
    "parse_legged",
    "format_legged",
    "star",
    "straight_leg",
    "legged_canonical_form",
    "glue",
    "glue_chain",
    "legged_union",
    "expand_legged",
    "legged_coboundary",
    "legged_basis",
    "correlation",
    "correlation_of_representative",
    "slot_contract",
    "composition_sign",
]


@dataclass(frozen=True, order=True)
class LeggedRibbonGraph:
    """Fully ordered ribbon graph with labelled incoming and outgoing legs."""

    valences: tuple[int, ...]
    chords: tuple[tuple[int, int], ...]
    ins: tuple[int, ...] = ()
    outs: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "valences", tuple(int(k) for k in self.valences))
        object.__setattr__(self, "chords", tuple((int(a), int(b)) for a, b in self.chords))
        object.__setattr__(self, "ins", tuple(int(x) for x in self.ins))
        object.__setattr__(self, "outs", tuple(int(x) for x in self.outs))
        if any(k < 3 for k in self.valences):
            raise ValueError("internal vertices need valence at least 3")
        n = sum(self.valences)
        used = [h for c in self.chords for h in c]
        used += [h for h in self.ins if h >= 0] + [h for h in self.outs if h >= 0]
        if sorted(used) != list(range(n)):
            raise ValueError("edges and legs do not partition the half-edges")
        for i, h in enumerate(self.ins):
            if h < 0 and not (-h - 1 < len(self.outs) and self.outs[-h - 1] == -(i + 1)):
                raise ValueError("inconsistent straight leg")
        for k, h in enumerate(self.outs):
            if h < 0 and not (-h - 1 < len(self.ins) and self.ins[-h - 1] == -(k + 1)):
                raise ValueError("inconsistent straight leg")

    @property
    def num_vertices(self) -> int:
        return len(self.valences)

    @property
    def num_edges(self) -> int:
        """Number of internal edges."""
        return len(self.chords)

    @property
    def num_half_edges(self) -> int:
        return sum(self.valences)

    @property
    def bidegree(self) -> tuple[int, int]:
        return (len(self.valences), len(self.chords))

    @property
    def legs(self) -> tuple[int, int]:
        return (len(self.ins), len(self.outs))

    def starts(self) -> list[int]:
        out, s = [], 0
        for k in self.valences:
            out.append(s)
            s += k
        return out

    def vertex_of(self) -> list[int]:
        out = []
        for v, k in enumerate(self.valences):
            out.extend([v] * k)
        return out

    def labels(self) -> dict[int, int]:
        """Leg code of every attachment position: ``-(2 + 2i)`` for in ``i``, ``-(3 + 2k)`` for out ``k``."""
        lab = {}
        for i, h in enumerate(self.ins):
            if h >= 0:
                lab[h] = -(2 + 2 * i)
        for k, h in enumerate(self.outs):
            if h >= 0:
                lab[h] = -(3 + 2 * k)
        return lab

    def partner(self) -> list[int]:
        """Chord partner of each position, or its leg code."""
        p = [0] * self.num_half_edges
        for a, b in self.chords:
            p[a], p[b] = b, a
        for h, code in self.labels().items():
            p[h] = code
        return p

    def straight_legs(self) -> list[tuple[int, int]]:
        return [(i, -h - 1) for i, h in enumerate(self.ins) if h < 0]

    def negated(self) -> "LeggedRibbonGraph":
        """The same graph with the opposite orientation (first edge reversed)."""
        if not self.chords:
            raise ValueError("a graph without internal edges has a single orientation")
        (a, b), rest = self.chords[0], self.chords[1:]
        return LeggedRibbonGraph(self.valences, ((b, a),) + rest, self.ins, self.outs)


_LEGGED = re.compile(
    r"^\s*valences\s*=\s*\[(?P<v>[^\]]*)\]\s*;\s*chords\s*=\s*\[(?P<c>[^\]]*)\]\s*;"
    r"\s*in\s*=\s*\[(?P<i>[^\]]*)\]\s*;\s*out\s*=\s*\[(?P<o>[^\]]*)\]\s*$"
)
_PAIR = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def _parse_legs(body: str, other: str) -> tuple[int, ...]:
    out = []
    for tok in (t.strip() for t in body.split(",")):
        if not tok:
            continue
        if tok[0] == other:
            out.append(-int(tok[1:]))
        else:
            out.append(int(tok) - 1)
    return tuple(out)


def parse_legged(text: str) -> LeggedRibbonGraph:
    match = _LEGGED.match(text)
    if not match:
        raise ValueError(f"malformed legged graph literal: {text!r}")
    vals = tuple(int(x) for x in match.group("v").split(",") if x.strip())
    body = match.group("c")
    if _PAIR.sub("", body).replace(",", "").strip():
        raise ValueError(f"malformed chord list: {body!r}")
    chords = tuple((int(a) - 1, int(b) - 1) for a, b in _PAIR.findall(body))
    return LeggedRibbonGraph(vals, chords, _parse_legs(match.group("i"), "o"), _parse_legs(match.group("o"), "i"))


def format_legged(graph: LeggedRibbonGraph) -> str:
    def legs(ends: Sequence[int], other: str) -> str:
        return ",".join(f"{other}{-h}" if h < 0 else str(h + 1) for h in ends)

    vals = ",".join(str(k) for k in graph.valences)
    chords = ",".join(f"({a + 1},{b + 1})" for a, b in graph.chords)
    return f"valences=[{vals}]; chords=[{chords}]; in=[{legs(graph.ins, 'o')}]; out=[{legs(graph.outs, 'i')}]"


def star(num_in: int, num_out: int) -> LeggedRibbonGraph:
    """One internal vertex carrying the incoming legs then the outgoing legs."""
    k = num_in + num_out
    return LeggedRibbonGraph((k,), (), tuple(range(num_in)), tuple(range(num_in, k)))


def straight_leg() -> LeggedRibbonGraph:
    """A single leg from incoming 1 to outgoing 1."""
    return LeggedRibbonGraph((), (), (-1,), (-1,))


# ---------------------------------------------------------------- canonical form


@dataclass(frozen=True)
class LeggedCanonicalForm:
    """Canonical representative of a legged graph.

    ``graph`` has its chords sorted and directed from the smaller position.
    The input equals ``sign * graph`` in the edge-order convention and
    ``vertex_sign * graph`` in the vertex-order convention; ``is_zero`` and
    ``vertex_zero`` flag an automorphism reversing the respective orientation.
    """

    graph: LeggedRibbonGraph
    sign: int
    is_zero: bool
    aut_order: int
    vertex_sign: int
    vertex_zero: bool


def _components(graph: LeggedRibbonGraph) -> list[list[int]]:
    m = graph.num_vertices
    starts, vof, partner = graph.starts(), graph.vertex_of(), graph.partner()
    seen = [False] * m
    comps = []
    for v0 in range(m):
        if seen[v0]:
            continue
        seen[v0] = True
        stack, comp = [v0], []
        while stack:
            v = stack.pop()
            comp.append(v)
            for h in range(starts[v], starts[v] + graph.valences[v]):
                if partner[h] >= 0 and not seen[vof[partner[h]]]:
                    seen[vof[partner[h]]] = True
                    stack.append(vof[partner[h]])
        comps.append(sorted(comp))
    return comps


def _traverse(graph: LeggedRibbonGraph, starts, vof, partner, dart: int):
    order: list[int] = []
    entry: dict[int, int] = {}
    new_pos: dict[int, int] = {}

    def visit(h: int) -> None:
        v = vof[h]
        order.append(v)
        entry[v] = h
        s, k = starts[v], graph.valences[v]
        for t in range(k):
            new_pos[s + (h - s + t) % k] = len(new_pos)

    visit(dart)
    qi = 0
    while qi < len(order):
        v = order[qi]
        s, k = starts[v], graph.valences[v]
        for t in range(k):
            p = partner[s + (entry[v] - s + t) % k]
            if p >= 0 and vof[p] not in entry:
                visit(p)
        qi += 1
    code_partner = [0] * len(new_pos)
    for old, new in new_pos.items():
        p = partner[old]
        code_partner[new] = new_pos[p] if p >= 0 else p
    code = tuple(graph.valences[v] for v in order) + (-1,) + tuple(code_partner)
    return code, order, new_pos


def _chord_signs(graph: LeggedRibbonGraph, new_pos: Mapping[int, int], chord_ids: Sequence[int]):
    """Edge-order sign and flip parity of relabelling the given chords."""
    mapped = []
    flips = 0
    for r in chord_ids:
        a, b = graph.chords[r]
        na, nb = new_pos[a], new_pos[b]
        if na > nb:
            na, nb = nb, na
            flips += 1
        mapped.append((na, nb))
    order = sorted(range(len(mapped)), key=lambda t: mapped[t])
    perm = [0] * len(order)
    for rank, t in enumerate(order):
        perm[t] = rank
    return perm_sign(perm), -1 if flips & 1 else 1, mapped


def _rank_sign(order: Sequence[int]) -> int:
    ranks = {v: r for r, v in enumerate(sorted(order))}
    return perm_sign([ranks[v] for v in order])


def legged_canonical_form(graph: LeggedRibbonGraph) -> LeggedCanonicalForm:
    starts, vof, partner = graph.starts(), graph.vertex_of(), graph.partner()
    chord_at = {}
    for r, (a, b) in enumerate(graph.chords):
        chord_at[a] = chord_at[b] = r
    parts = []
    zero = vzero = False
    aut = 1
    for comp in _components(graph):
        darts = [h for v in comp for h in range(starts[v], starts[v] + graph.valences[v])]
        ids = sorted({chord_at[h] for h in darts if h in chord_at})
        best, signs = None, set()
        count = 0
        for d in darts:
            code, order, new_pos = _traverse(graph, starts, vof, partner, d)
            if best is not None and code > best[0]:
                continue
            e_sign, flip, _ = _chord_signs(graph, new_pos, ids)
            pair = (e_sign * flip, _rank_sign(order) * flip)
            if best is None or code < best[0]:
                best, signs, count = (code, order, new_pos), {pair}, 1
            else:
                signs.add(pair)
                count += 1
        if len({s[0] for s in signs}) > 1:
            zero = True
        if len({s[1] for s in signs}) > 1:
            vzero = True
        aut *= count
        parts.append(best)
    parts.sort(key=lambda p: p[0])
    for code, group in itertools.groupby(parts, key=lambda p: p[0]):
        mult = len(list(group))
        if mult > 1:
            aut *= factorial(mult)
            nverts = code.index(-1)
            nedges = (len(code) - nverts - 1) // 2
            zero = zero or bool(nedges % 2)
            vzero = vzero or bool(nverts % 2)
    vertex_order: list[int] = []
    full_pos: dict[int, int] = {}
    for _, order, new_pos in parts:
        offset = len(full_pos)
        vertex_order.extend(order)
        for old, new in new_pos.items():
            full_pos[old] = new + offset
    e_sign, flip, mapped = _chord_signs(graph, full_pos, range(len(graph.chords)))
    canon = LeggedRibbonGraph(
        tuple(graph.valences[v] for v in vertex_order),
        tuple(sorted(mapped)),
        tuple(full_pos[h] if h >= 0 else h for h in graph.ins),
        tuple(full_pos[h] if h >= 0 else h for h in graph.outs),
    )
    return LeggedCanonicalForm(canon, e_sign * flip, zero, aut, _rank_sign(vertex_order) * flip, vzero)


# ---------------------------------------------------------------- chains


@dataclass
class LeggedChain:
    """Linear combination of canonical legged graphs (edge-order convention)."""

    terms: dict[LeggedRibbonGraph, Fraction] = field(default_factory=dict)

    @classmethod
    def of(cls, graph: LeggedRibbonGraph, coeff=1) -> "LeggedChain":
        out = cls()
        out.add(graph, coeff)
        return out

    def add(self, graph: LeggedRibbonGraph, coeff) -> None:
        cf = legged_canonical_form(graph)
        if cf.is_zero:
            return
        key = cf.graph
        val = self.terms.get(key, Fraction(0)) + cf.sign * Fraction(coeff)
        if val:
            self.terms[key] = val
        else:
            self.terms.pop(key, None)

    def __add__(self, other: "LeggedChain") -> "LeggedChain":
        out = LeggedChain(dict(self.terms))
        for g, c in other.terms.items():
            val = out.terms.get(g, Fraction(0)) + c
            if val:
                out.terms[g] = val
            else:
                out.terms.pop(g, None)
        return out

    def scale(self, c) -> "LeggedChain":
        c = Fraction(c)
        return LeggedChain({g: v * c for g, v in self.terms.items()} if c else {})

    def is_zero(self) -> bool:
        return not self.terms


# ---------------------------------------------------------------- gluing


def legged_union(g1: LeggedRibbonGraph, g2: LeggedRibbonGraph) -> LeggedRibbonGraph:
    """Disjoint union; legs of ``g2`` are numbered after those of ``g1``."""
    off = g1.num_half_edges
    m1, n1 = g1.legs

    def shift_in(h: int) -> int:
        return h + off if h >= 0 else h - n1

    def shift_out(h: int) -> int:
        return h + off if h >= 0 else h - m1

    return LeggedRibbonGraph(
        g1.valences + g2.valences,
        g1.chords + tuple((a + off, b + off) for a, b in g2.chords),
        g1.ins + tuple(shift_in(h) for h in g2.ins),
        g1.outs + tuple(shift_out(h) for h in g2.outs),
    )


def glue(g1: LeggedRibbonGraph, g2: LeggedRibbonGraph) -> LeggedRibbonGraph:
    """Join outgoing leg ``k`` of ``g1`` to incoming leg ``k`` of ``g2``.

    The vertices of ``g1`` come first.  The internal edges are those of
    ``g1``, then those of ``g2``, then one new edge per glued pair of
    attached legs, in label order and directed from ``g1`` to ``g2``.
    Straight legs are welded through.
    """
    if len(g1.outs) != len(g2.ins):
        raise ValueError(f"cannot glue {len(g1.outs)} outgoing legs to {len(g2.ins)} incoming legs")
    off = g1.num_half_edges
    ins = list(g1.ins)
    outs = [h + off if h >= 0 else h for h in g2.outs]
    new_chords = []
    for k, (e1, e2) in enumerate(zip(g1.outs, g2.ins)):
        if e1 >= 0 and e2 >= 0:
            new_chords.append((e1, e2 + off))
        elif e1 >= 0:
            outs[-e2 - 1] = e1
        elif e2 >= 0:
            ins[-e1 - 1] = e2 + off
        else:
            ins[-e1 - 1] = -(-e2 - 1) - 1
            outs[-e2 - 1] = -(-e1 - 1) - 1
    # straight legs of g1 must point into the new out list, and vice versa
    for i, h in enumerate(ins):
        if h < 0 and outs[-h - 1] != -(i + 1):
            raise AssertionError("inconsistent weld")
    chords = g1.chords + tuple((a + off, b + off) for a, b in g2.chords) + tuple(new_chords)
    return LeggedRibbonGraph(g1.valences + g2.valences, chords, tuple(ins), tuple(outs))


def glue_chain(x: LeggedChain, y: LeggedChain) -> LeggedChain:
    """Bilinear extension of :func:`glue`, canonicalized."""
    out = LeggedChain()
    for g1, c1 in x.terms.items():
        for g2, c2 in y.terms.items():
            out.add(glue(g1, g2), c1 * c2)
    return out


# ---------------------------------------------------------------- differential


def expand_legged(graph: LeggedRibbonGraph, ideal: IdealEdge) -> tuple[LeggedRibbonGraph, int]:
    """Split an internal vertex along an ideal edge.

    Returns the expanded representative and its sign in the vertex-order
    convention: the two new vertices come first and the new edge is last.
    """
    j = ideal.vertex
    k = graph.valences[j]
    if not (0 <= ideal.cut1 < ideal.cut2 < k) or ideal.cut2 - ideal.cut1 < 2 or k - ideal.cut2 + ideal.cut1 < 2:
        raise ValueError("invalid ideal edge")
    starts = graph.starts()
    s = starts[j]
    part1 = [s + t for t in range(ideal.cut1, ideal.cut2)]
    part2 = [s + (t % k) for t in range(ideal.cut2, ideal.cut1 + k)]
    new_pos: dict[int, int] = {}
    for h in part1:
        new_pos[h] = len(new_pos)
    a_new = len(part1)
    for h in part2:
        new_pos[h] = len(new_pos) + 1
    b_new = len(part1) + len(part2) + 1
    pos = b_new + 1
    rest = [v for v in range(graph.num_vertices) if v != j]
    for v in rest:
        for h in range(starts[v], starts[v] + graph.valences[v]):
            new_pos[h] = pos
            pos += 1
    vals = (len(part1) + 1, len(part2) + 1) + tuple(graph.valences[v] for v in rest)
    chords = tuple((new_pos[a], new_pos[b]) for a, b in graph.chords) + ((a_new, b_new),)
    ins = tuple(new_pos[h] if h >= 0 else h for h in graph.ins)
    outs = tuple(new_pos[h] if h >= 0 else h for h in graph.outs)
    return LeggedRibbonGraph(vals, chords, ins, outs), (-1 if j % 2 else 1)


def _ideal_edges(graph: LeggedRibbonGraph) -> Iterable[IdealEdge]:
    for v, k in enumerate(graph.valences):
        for c1 in range(k):
            for c2 in range(c1 + 2, k):
                if k - (c2 - c1) >= 2:
                    yield IdealEdge(v, c1, c2)


def legged_coboundary(x: LeggedChain | LeggedRibbonGraph) -> LeggedChain:
    """Sum of all internal vertex expansions.

    Each canonical graph is read in the vertex-order convention, expanded
    there, and every term is brought back through its canonical
    representative.  Classes that vanish in either convention are dropped.
    """
    chain = LeggedChain.of(x) if isinstance(x, LeggedRibbonGraph) else x
    out = LeggedChain()
    for g, c in chain.terms.items():
        if legged_canonical_form(g).vertex_zero:
            continue
        for ideal in _ideal_edges(g):
            big, s = expand_legged(g, ideal)
            cf = legged_canonical_form(big)
            if cf.is_zero or cf.vertex_zero:
                continue
            key = cf.graph
            val = out.terms.get(key, Fraction(0)) + c * s * cf.vertex_sign
            if val:
                out.terms[key] = val
            else:
                out.terms.pop(key, None)
    return out


def legged_basis(vertices: int, edges: int, num_in: int, num_out: int) -> list[LeggedRibbonGraph]:
    """Canonical nonzero legged graphs of the given bidegree with no straight legs.

    Brute force over valence lists and pairings; meant for small sizes.
    """
    legs = num_in + num_out
    total = 2 * edges + legs
    found: set[LeggedRibbonGraph] = set()
    for vals in _valence_lists(vertices, total):
        positions = list(range(total))
        for leg_pos in itertools.permutations(positions, legs):
            rest = [h for h in positions if h not in leg_pos]
            for matching in _matchings(rest):
                g = LeggedRibbonGraph(vals, tuple(matching), leg_pos[:num_in], leg_pos[num_in:])
                if len(_components(g)) != 1 and vertices:
                    continue
                cf = legged_canonical_form(g)
                if not cf.is_zero and not cf.vertex_zero:
                    found.add(cf.graph)
    return sorted(found)


def _valence_lists(vertices: int, total: int) -> Iterable[tuple[int, ...]]:
    if vertices == 0:
        if total == 0:
            yield ()
        return
    for combo in itertools.product(range(3, total + 1), repeat=vertices):
        if sum(combo) == total:
            yield combo


def _matchings(points: list[int]) -> Iterable[list[tuple[int, int]]]:
    if not points:
        yield []
        return
    first, rest = points[0], points[1:]
    for r, other in enumerate(rest):
        for tail in _matchings(rest[:r] + rest[r + 1 :]):
            yield [(first, other)] + tail


# ---------------------------------------------------------------- correlation


@dataclass(frozen=True)
class CorrelationTensor:
    """Tensor with ``num_in + num_out`` slots, incoming slots first.

    Slot values are letters of the algebra; ``coeffs`` maps letter tuples to
    rationals and omits zeros.
    """

    coeffs: Mapping[tuple[int, ...], Fraction]
    num_in: int
    num_out: int
    parities: tuple[int, ...]

    def is_zero(self) -> bool:
        return not self.coeffs

    def scale(self, c) -> "CorrelationTensor":
        c = Fraction(c)
        data = {k: v * c for k, v in self.coeffs.items()} if c else {}
        return CorrelationTensor(data, self.num_in, self.num_out, self.parities)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CorrelationTensor):
            return NotImplemented
        return (self.num_in, self.num_out) == (other.num_in, other.num_out) and dict(self.coeffs) == dict(other.coeffs)

    def __hash__(self) -> int:  # pragma: no cover - tensors are compared, not hashed
        raise TypeError("CorrelationTensor is unhashable")


def _sources(A: AInfinityAlgebra | VertexData, form: Mapping[tuple[int, int], Fraction] | None):
    if isinstance(A, AInfinityAlgebra):
        return vertex_data(A), A.form.sparse()
    if form is None:
        raise ValueError("straight legs need the pairing of the algebra")
    return A, form


def correlation_of_representative(
    graph: LeggedRibbonGraph,
    A: AInfinityAlgebra | VertexData,
    form: Mapping[tuple[int, int], Fraction] | None = None,
) -> CorrelationTensor:
    """Contract the vertex tensors of ``A`` along the internal edges of this exact representative.

    The letters of all positions, followed by the two ends of each straight
    leg, are moved (with Koszul signs) into the order: edge 1 tail, edge 1
    head, edge 2 tail, ..., incoming slots, outgoing slots.  Edges are
    weighted by the inverse pairing, straight legs by the pairing itself.
    """
    data, form = _sources(A, form)
    par = data.parities
    m, n = graph.legs
    e = graph.num_edges
    size = graph.num_half_edges
    straight = graph.straight_legs()
    target = [0] * (size + 2 * len(straight))
    for r, (a, b) in enumerate(graph.chords):
        target[a], target[b] = 2 * r, 2 * r + 1
    for i, h in enumerate(graph.ins):
        if h >= 0:
            target[h] = 2 * e + i
    for k, h in enumerate(graph.outs):
        if h >= 0:
            target[h] = 2 * e + m + k
    for t, (i, k) in enumerate(straight):
        target[size + 2 * t] = 2 * e + i
        target[size + 2 * t + 1] = 2 * e + m + k
    starts = graph.starts()
    vof = graph.vertex_of()
    checks: list[list[tuple[int, int]]] = [[] for _ in range(graph.num_vertices)]
    for a, b in graph.chords:
        checks[max(vof[a], vof[b])].append((a, b))
    blocks = []
    for k in graph.valences:
        alts = [(w, Fraction(c)) for w, c in data.blocks.get(k, ()) if c]
        if not alts:
            return CorrelationTensor({}, m, n, par)
        blocks.append(alts)
    form_items = [(key, Fraction(v)) for key, v in form.items() if v]
    letters = [0] * len(target)
    acc: dict[tuple[int, ...], Fraction] = {}
    slot_source = [0] * (m + n)
    for src, tgt in enumerate(target):
        if tgt >= 2 * e:
            slot_source[tgt - 2 * e] = src

    def leaf(val: Fraction) -> None:
        sign = koszul_sign(target, [par[x] for x in letters])
        key = tuple(letters[s] for s in slot_source)
        acc[key] = acc.get(key, Fraction(0)) + sign * val

    def legs_rec(t: int, val: Fraction) -> None:
        if t == len(straight):
            leaf(val)
            return
        for (x, y), w in form_items:
            letters[size + 2 * t], letters[size + 2 * t + 1] = x, y
            legs_rec(t + 1, val * w)

    def rec(v: int, val: Fraction) -> None:
        if v == graph.num_vertices:
            legs_rec(0, val)
            return
        s = starts[v]
        for word, c in blocks[v]:
            letters[s : s + len(word)] = word
            cur = val * c
            for a, b in checks[v]:
                pv = data.pairing.get((letters[a], letters[b]))
                if not pv:
                    cur = None
                    break
                cur *= pv
            if cur is not None:
                rec(v + 1, cur)

    rec(0, Fraction(1))
    return CorrelationTensor({k: v for k, v in acc.items() if v}, m, n, par)


def correlation(
    A: AInfinityAlgebra | VertexData,
    graph: LeggedRibbonGraph,
    form: Mapping[tuple[int, int], Fraction] | None = None,
) -> CorrelationTensor:
    """Correlation tensor of the oriented legged graph ``graph``.

    Evaluated on the canonical representative and multiplied by the
    edge-order sign relating ``graph`` to it; zero when the graph admits an
    orientation-reversing automorphism.
    """
    cf = legged_canonical_form(graph)
    data, form = _sources(A, form)
    m, n = graph.legs
    if cf.is_zero:
        return CorrelationTensor({}, m, n, data.parities)
    return correlation_of_representative(cf.graph, data, form).scale(cf.sign)


def composition_sign(g1: LeggedRibbonGraph, g2: LeggedRibbonGraph) -> int:
    """Sign relating the correlation of ``glue(g1, g2)`` to the slot contraction.

    On fixed representatives the contraction is exact; the sign is the
    product over the three graphs of (edge-order sign) * (vertex-order sign)
    of passing to the canonical representative.
    """
    out = 1
    for g in (g1, g2, glue(g1, g2)):
        cf = legged_canonical_form(g)
        out *= cf.sign * cf.vertex_sign
    return out


def slot_contract(
    t1: CorrelationTensor,
    t2: CorrelationTensor,
    pairing: Mapping[tuple[int, int], Fraction],
) -> CorrelationTensor:
    """Contract outgoing slot ``k`` of ``t1`` with incoming slot ``k`` of ``t2``.

    Each matched pair is weighted by ``pairing[(a, b)]`` after the pairs are
    brought to the front, pair by pair, with Koszul signs.
    """
    if t1.num_out != t2.num_in:
        raise ValueError("slot counts do not match")
    par = t1.parities
    m1, n, n2 = t1.num_in, t1.num_out, t2.num_out
    target = [0] * (m1 + 2 * n + n2)
    for j in range(m1):
        target[j] = 2 * n + j
    for k in range(n):
        target[m1 + k] = 2 * k
        target[m1 + n + k] = 2 * k + 1
    for l in range(n2):
        target[m1 + 2 * n + l] = 2 * n + m1 + l
    by_prefix: dict[tuple[int, ...], list[tuple[tuple[int, ...], Fraction]]] = {}
    for key, c in t2.coeffs.items():
        by_prefix.setdefault(key[:n], []).append((key[n:], c))
    out: dict[tuple[int, ...], Fraction] = {}
    for key1, c1 in t1.coeffs.items():
        a = key1[m1:]
        options: list[list[tuple[int, Fraction]]] = []
        for x in a:
            options.append([(y, v) for (p, y), v in pairing.items() if p == x and v])
        for choice in itertools.product(*options):
            b = tuple(y for y, _ in choice)
            w = c1
            for _, v in choice:
                w *= v
            for rest, c2 in by_prefix.get(b, ()):
                seq = key1[:m1] + a + b + rest
                sign = koszul_sign(target, [par[x] for x in seq])
                key = key1[:m1] + rest
                out[key] = out.get(key, Fraction(0)) + sign * w * c2
    return CorrelationTensor({k: v for k, v in out.items() if v}, m1, n2, par)
