"""Ribbon graphs with orientation, canonical forms, contraction and expansion.

A :class:`RibbonGraph` is stored as a *fully ordered* representative: the
half-edges are the positions ``0..2k-1``; vertex ``v`` owns the consecutive
block of ``valences[v]`` positions and its cyclic order is the block order;
every edge is an ordered pair ``(a, b)`` of positions.  The orientation is the
class of (vertex order, edge directions) modulo the character

    sign = sgn(vertex permutation) * (-1) ** (number of reversed edges),

so a representative is also the oriented graph it stands for.  Rotating the
half-edges of one vertex or reordering the chord list does not change the
orientation.

The literal format is 1-based: ``valences=[3,3]; chords=[(1,4),(2,5),(3,6)]``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from math import factorial
from typing import Iterable, Iterator, Sequence

from .super_core import perm_sign

__all__ = [
    "RibbonGraph",
    "FullyOrderedGraph",
    "OrientedRibbonGraph",
    "EMPTY_GRAPH",
    "CanonicalForm",
    "IdealEdge",
    "graph_from_chords",
    "chords_from_graph",
    "parse_graph",
    "format_graph",
    "canonical_form",
    "automorphism_group",
    "orientation_character",
    "contract_edge",
    "enumerate_ideal_edges",
    "expand_ideal_edge",
    "disjoint_union",
    "connected_components",
    "relabel",
]


@dataclass(frozen=True, order=True)
class RibbonGraph:
    """Fully ordered ribbon graph (see module docstring for conventions)."""

    valences: tuple[int, ...]
    chords: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "valences", tuple(int(k) for k in self.valences))
        object.__setattr__(self, "chords", tuple((int(a), int(b)) for a, b in self.chords))
        n = sum(self.valences)
        if any(k < 1 for k in self.valences):
            raise ValueError("valences must be positive")
        seen = sorted(h for c in self.chords for h in c)
        if seen != list(range(n)):
            raise ValueError("chords do not partition the half-edges")

    @property
    def num_vertices(self) -> int:
        return len(self.valences)

    @property
    def num_edges(self) -> int:
        return len(self.chords)

    @property
    def num_half_edges(self) -> int:
        return 2 * len(self.chords)

    @property
    def bidegree(self) -> tuple[int, int]:
        return (len(self.valences), len(self.chords))

    @property
    def euler_characteristic(self) -> int:
        return len(self.valences) - len(self.chords)

    def starts(self) -> list[int]:
        out, pos = [], 0
        for k in self.valences:
            out.append(pos)
            pos += k
        return out

    def vertex_of(self) -> list[int]:
        out: list[int] = []
        for v, k in enumerate(self.valences):
            out.extend([v] * k)
        return out

    def partner(self) -> list[int]:
        out = [0] * self.num_half_edges
        for a, b in self.chords:
            out[a] = b
            out[b] = a
        return out

    def is_loop(self, edge: int) -> bool:
        vof = self.vertex_of()
        a, b = self.chords[edge]
        return vof[a] == vof[b]

    def flip_edge(self, edge: int) -> "RibbonGraph":
        chords = list(self.chords)
        a, b = chords[edge]
        chords[edge] = (b, a)
        return RibbonGraph(self.valences, tuple(chords))

    def negated(self) -> "RibbonGraph":
        """The same graph with the opposite orientation."""
        if self.chords:
            return self.flip_edge(0)
        if len(self.valences) >= 2:
            order = (1, 0) + tuple(range(2, len(self.valences)))
            graph, _ = relabel(self, order)
            return graph
        raise ValueError("the empty graph has no opposite orientation")

    def __str__(self) -> str:
        return format_graph(self)


FullyOrderedGraph = RibbonGraph
OrientedRibbonGraph = RibbonGraph
EMPTY_GRAPH = RibbonGraph((), ())


def _with_sign(graph: RibbonGraph, sign: int) -> RibbonGraph:
    return graph if sign > 0 else graph.negated()


# ---------------------------------------------------------------- literals


def graph_from_chords(chords: Iterable[Sequence[int]], valences: Sequence[int]) -> RibbonGraph:
    """Build the fully ordered graph of a 1-based oriented chord diagram."""
    valences = tuple(valences)
    if any(k < 3 for k in valences):
        raise ValueError("every vertex must have valence at least 3")
    pairs = tuple((int(a) - 1, int(b) - 1) for a, b in chords)
    if sum(valences) != 2 * len(pairs):
        raise ValueError("valence sum does not match the number of chord endpoints")
    return RibbonGraph(valences, pairs)


def chords_from_graph(graph: RibbonGraph) -> tuple[tuple[int, int], ...]:
    """Inverse of :func:`graph_from_chords` (1-based, sorted by first entry)."""
    return tuple(sorted((a + 1, b + 1) for a, b in graph.chords))


_LITERAL = re.compile(r"^\s*valences\s*=\s*\[(?P<v>[^\]]*)\]\s*;\s*chords\s*=\s*\[(?P<c>.*)\]\s*$")
_PAIR = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def parse_graph(text: str, min_valence: int = 3) -> RibbonGraph:
    match = _LITERAL.match(text)
    if not match:
        raise ValueError(f"malformed graph literal: {text!r}")
    vals = [int(x) for x in match.group("v").split(",") if x.strip()]
    body = match.group("c")
    pairs = [(int(a), int(b)) for a, b in _PAIR.findall(body)]
    if _PAIR.sub("", body).replace(",", "").strip():
        raise ValueError(f"malformed chord list: {body!r}")
    if any(k < min_valence for k in vals):
        raise ValueError(f"vertex valences must be at least {min_valence}")
    return RibbonGraph(tuple(vals), tuple((a - 1, b - 1) for a, b in pairs))


def format_graph(graph: RibbonGraph) -> str:
    vals = ",".join(str(k) for k in graph.valences)
    chords = ",".join(f"({a + 1},{b + 1})" for a, b in graph.chords)
    return f"valences=[{vals}]; chords=[{chords}]"


# ---------------------------------------------------------------- relabeling


def relabel(
    graph: RibbonGraph,
    vertex_order: Sequence[int],
    rotations: Sequence[int] | None = None,
) -> tuple[RibbonGraph, int]:
    """Reorder vertices and rotate each vertex, keeping edge directions.

    ``vertex_order[r]`` is the old vertex placed at position ``r``;
    ``rotations[v]`` is the local index of the half-edge of old vertex ``v``
    that becomes first.  Returns the new representative and the orientation
    sign relating it to ``graph`` (``graph = sign * result``).
    """
    starts = graph.starts()
    rot = rotations if rotations is not None else [0] * len(graph.valences)
    new_pos = [0] * graph.num_half_edges
    pos = 0
    for v in vertex_order:
        k = graph.valences[v]
        for t in range(k):
            new_pos[starts[v] + (rot[v] + t) % k] = pos
            pos += 1
    vals = tuple(graph.valences[v] for v in vertex_order)
    chords = tuple((new_pos[a], new_pos[b]) for a, b in graph.chords)
    return RibbonGraph(vals, chords), perm_sign(_order_to_perm(vertex_order))


def _order_to_perm(order: Sequence[int]) -> tuple[int, ...]:
    perm = [0] * len(order)
    for r, v in enumerate(order):
        perm[v] = r
    return tuple(perm)


# ---------------------------------------------------------------- canonical form


@dataclass(frozen=True)
class CanonicalForm:
    """Result of :func:`canonical_form`.

    ``graph`` is the canonical representative (chords sorted, each directed
    from the smaller to the larger position); the input equals
    ``sign * graph`` in the graph complex.  ``aut_order`` is the number of
    ribbon automorphisms; ``is_zero`` flags an orientation-reversing one.
    """

    graph: RibbonGraph
    sign: int
    is_zero: bool
    aut_order: int

    @property
    def key(self) -> RibbonGraph:
        return self.graph


class _Structure:
    __slots__ = ("valences", "starts", "vertex_of", "partner", "tail")

    def __init__(self, graph: RibbonGraph):
        self.valences = graph.valences
        self.starts = graph.starts()
        self.vertex_of = graph.vertex_of()
        self.partner = graph.partner()
        self.tail = [False] * graph.num_half_edges
        for a, _ in graph.chords:
            self.tail[a] = True

    def components(self) -> list[list[int]]:
        """Vertex sets of connected components, in order of least vertex."""
        m = len(self.valences)
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
                s = self.starts[v]
                for h in range(s, s + self.valences[v]):
                    w = self.vertex_of[self.partner[h]]
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def traverse(self, dart: int) -> tuple[tuple[int, ...], list[int], dict[int, int], int]:
        """Breadth-first labeling of the component of ``dart``.

        Returns (code, vertex order, new position of each half-edge, sign).
        The code lists the valences then the partner of each new position.
        """
        valences, starts, vof, partner = self.valences, self.starts, self.vertex_of, self.partner
        order: list[int] = []
        entry: dict[int, int] = {}
        new_pos: dict[int, int] = {}
        pos = 0

        def visit(h: int) -> None:
            nonlocal pos
            v = vof[h]
            order.append(v)
            entry[v] = h
            s, k = starts[v], valences[v]
            off = h - s
            for t in range(k):
                new_pos[s + (off + t) % k] = pos
                pos += 1

        visit(dart)
        qi = 0
        while qi < len(order):
            v = order[qi]
            s, k = starts[v], valences[v]
            off = entry[v] - s
            for t in range(k):
                p = partner[s + (off + t) % k]
                if vof[p] not in entry:
                    visit(p)
            qi += 1
        n = pos
        code_partner = [0] * n
        flips = 0
        for old, new in new_pos.items():
            code_partner[new] = new_pos[partner[old]]
            if self.tail[old] and new_pos[partner[old]] < new:
                flips += 1
        code = tuple(valences[v] for v in order) + (-1,) + tuple(code_partner)
        sign = perm_sign(_order_to_perm(_rank_order(order))) * (-1 if flips & 1 else 1)
        return code, order, new_pos, sign


def _rank_order(order: Sequence[int]) -> list[int]:
    ranks = {v: r for r, v in enumerate(sorted(order))}
    return [ranks[v] for v in order]


def _component_best(st: _Structure, comp: list[int]):
    darts = [h for v in comp for h in range(st.starts[v], st.starts[v] + st.valences[v])]
    best = None
    count = 0
    signs = set()
    for d in darts:
        code, order, new_pos, sign = st.traverse(d)
        if best is None or code < best[0]:
            best = (code, order, new_pos, sign)
            count = 1
            signs = {sign}
        elif code == best[0]:
            count += 1
            signs.add(sign)
    return best, count, len(signs) > 1


def canonical_form(graph: RibbonGraph) -> CanonicalForm:
    if not graph.valences:
        return CanonicalForm(graph, 1, False, 1)
    st = _Structure(graph)
    parts = []
    zero = False
    aut = 1
    for comp in st.components():
        best, count, comp_zero = _component_best(st, comp)
        zero = zero or comp_zero
        aut *= count
        parts.append(best)
    parts.sort(key=lambda p: p[0])
    for code, group in itertools.groupby(parts, key=lambda p: p[0]):
        mult = len(list(group))
        aut *= factorial(mult)
        nverts = code.index(-1)
        if mult > 1 and nverts % 2:
            zero = True
    vertex_order: list[int] = []
    full_pos = [0] * graph.num_half_edges
    offset = 0
    for code, order, new_pos, _ in parts:
        vertex_order.extend(order)
        size = 0
        for old, new in new_pos.items():
            full_pos[old] = new + offset
            size += 1
        offset += size
    vals = tuple(graph.valences[v] for v in vertex_order)
    chords = []
    flips = 0
    for a, b in graph.chords:
        na, nb = full_pos[a], full_pos[b]
        if na > nb:
            na, nb = nb, na
            flips += 1
        chords.append((na, nb))
    canon = RibbonGraph(vals, tuple(sorted(chords)))
    sign = perm_sign(_order_to_perm(vertex_order)) * (-1 if flips & 1 else 1)
    return CanonicalForm(canon, sign, zero, aut)


def orientation_character(graph: RibbonGraph, phi: Sequence[int]) -> int:
    """Sign by which a structure-preserving half-edge bijection acts on the orientation."""
    starts = graph.starts()
    vof = graph.vertex_of()
    vperm = tuple(vof[phi[s]] for s in starts)
    stored = set(graph.chords)
    flips = sum(1 for a, b in graph.chords if (phi[a], phi[b]) not in stored)
    return perm_sign(vperm) * (-1 if flips & 1 else 1)


def automorphism_group(graph: RibbonGraph) -> list[tuple[tuple[int, ...], int]]:
    """All ribbon automorphisms as half-edge permutations with their orientation character."""
    if not graph.valences:
        return [((), 1)]
    st = _Structure(graph)
    comps = st.components()
    info = []
    for comp in comps:
        darts = [h for v in comp for h in range(st.starts[v], st.starts[v] + st.valences[v])]
        runs = [(st.traverse(d), d) for d in darts]
        best = min(r[0][0] for r in runs)
        labelings = [r[0][2] for r in runs if r[0][0] == best]
        info.append((best, labelings))
    groups: dict[tuple, list[int]] = {}
    for idx, (code, _) in enumerate(info):
        groups.setdefault(code, []).append(idx)
    per_group = []
    for code, members in groups.items():
        options = []
        for target in itertools.permutations(members):
            for choice in itertools.product(*(info[t][1] for t in target)):
                pieces = []
                for src, tgt_lab in zip(members, choice):
                    src_lab = info[src][1][0]
                    inverse = {new: old for old, new in tgt_lab.items()}
                    pieces.append({old: inverse[new] for old, new in src_lab.items()})
                options.append(pieces)
        per_group.append(options)
    out = []
    for combo in itertools.product(*per_group):
        phi = list(range(graph.num_half_edges))
        for pieces in combo:
            for piece in pieces:
                for h, img in piece.items():
                    phi[h] = img
        phi_t = tuple(phi)
        out.append((phi_t, orientation_character(graph, phi_t)))
    return out


# ---------------------------------------------------------------- contraction


def contract_edge(graph: RibbonGraph, edge: int) -> RibbonGraph:
    """Contract the non-loop edge ``graph.chords[edge]``.

    The merged vertex lists the half-edges following ``a`` then those
    following ``b`` (``(a, b)`` the stored direction) and is placed first.
    """
    a, b = graph.chords[edge]
    vof = graph.vertex_of()
    va, vb = vof[a], vof[b]
    if va == vb:
        raise ValueError("cannot contract a loop")
    starts = graph.starts()
    order = [va, vb] + [v for v in range(len(graph.valences)) if v not in (va, vb)]
    sign = perm_sign(_order_to_perm(order))
    new_pos: dict[int, int] = {}
    pos = 0
    for h in (a, b):
        v = vof[h]
        s, k = starts[v], graph.valences[v]
        for t in range(1, k):
            new_pos[s + (h - s + t) % k] = pos
            pos += 1
    merged = graph.valences[va] + graph.valences[vb] - 2
    for v in order[2:]:
        for h in range(starts[v], starts[v] + graph.valences[v]):
            new_pos[h] = pos
            pos += 1
    vals = (merged,) + tuple(graph.valences[v] for v in order[2:])
    chords = tuple(
        (new_pos[x], new_pos[y]) for i, (x, y) in enumerate(graph.chords) if i != edge
    )
    return _with_sign(RibbonGraph(vals, chords), sign)


@dataclass(frozen=True, order=True)
class IdealEdge:
    """Split of vertex ``vertex`` at the local cut points ``cut1 < cut2``.

    The two parts are the cyclic intervals ``[cut1, cut2)`` and
    ``[cut2, cut1 + valence)``; both must have at least two half-edges.
    """

    vertex: int
    cut1: int
    cut2: int


def enumerate_ideal_edges(graph: RibbonGraph, vertices: Iterable[int] | None = None) -> list[IdealEdge]:
    chosen = range(len(graph.valences)) if vertices is None else vertices
    out = []
    for v in chosen:
        k = graph.valences[v]
        for c1 in range(k):
            for c2 in range(c1 + 2, k):
                if k - (c2 - c1) >= 2:
                    out.append(IdealEdge(v, c1, c2))
    return out


def _check_ideal(graph: RibbonGraph, ideal: IdealEdge) -> None:
    if not 0 <= ideal.vertex < len(graph.valences):
        raise ValueError("ideal edge refers to a missing vertex")
    k = graph.valences[ideal.vertex]
    if not (0 <= ideal.cut1 < ideal.cut2 < k):
        raise ValueError("ideal edge cut points out of range")
    if ideal.cut2 - ideal.cut1 < 2 or k - (ideal.cut2 - ideal.cut1) < 2:
        raise ValueError("both parts of an ideal edge need at least two half-edges")


def expand_ideal_edge(graph: RibbonGraph, ideal: IdealEdge) -> RibbonGraph:
    """Split a vertex along an ideal edge, adding the new edge ``(a, b)``.

    The new vertices ``(part1, a)`` and ``(part2, b)`` come first.  Contracting
    the new edge returns ``graph`` with the same orientation.
    """
    _check_ideal(graph, ideal)
    j = ideal.vertex
    k = graph.valences[j]
    starts = graph.starts()
    s = starts[j]
    part1 = [s + t for t in range(ideal.cut1, ideal.cut2)]
    part2 = [s + (t % k) for t in range(ideal.cut2, ideal.cut1 + k)]
    new_pos: dict[int, int] = {}
    pos = 0
    for h in part1:
        new_pos[h] = pos
        pos += 1
    a_new = pos
    pos += 1
    for h in part2:
        new_pos[h] = pos
        pos += 1
    b_new = pos
    pos += 1
    rest = [v for v in range(len(graph.valences)) if v != j]
    for v in rest:
        for h in range(starts[v], starts[v] + graph.valences[v]):
            new_pos[h] = pos
            pos += 1
    vals = (len(part1) + 1, len(part2) + 1) + tuple(graph.valences[v] for v in rest)
    chords = tuple((new_pos[x], new_pos[y]) for x, y in graph.chords) + ((a_new, b_new),)
    sign = -1 if j % 2 else 1
    return _with_sign(RibbonGraph(vals, chords), sign)


# ---------------------------------------------------------------- unions


def disjoint_union(g1: RibbonGraph, g2: RibbonGraph) -> RibbonGraph:
    shift = g1.num_half_edges
    chords = g1.chords + tuple((a + shift, b + shift) for a, b in g2.chords)
    return RibbonGraph(g1.valences + g2.valences, chords)


def connected_components(graph: RibbonGraph) -> list[RibbonGraph]:
    """Connected pieces, ordered by their least vertex.

    Their disjoint union in this order equals ``graph`` up to the sign of
    the induced vertex permutation.
    """
    if not graph.valences:
        return []
    st = _Structure(graph)
    out = []
    for comp in st.components():
        new_pos: dict[int, int] = {}
        pos = 0
        for v in comp:
            for h in range(st.starts[v], st.starts[v] + st.valences[v]):
                new_pos[h] = pos
                pos += 1
        chords = tuple(
            (new_pos[a], new_pos[b]) for a, b in graph.chords if a in new_pos
        )
        out.append(RibbonGraph(tuple(graph.valences[v] for v in comp), chords))
    return out


def components_sign(graph: RibbonGraph) -> int:
    """Sign of ``graph`` against the disjoint union of its components."""
    if not graph.valences:
        return 1
    order = [v for comp in _Structure(graph).components() for v in comp]
    return perm_sign(_order_to_perm(order))


def is_connected(graph: RibbonGraph) -> bool:
    return len(graph.valences) <= 1 or len(_Structure(graph).components()) == 1


def iter_perfect_matchings(points: Sequence[int]) -> Iterator[list[tuple[int, int]]]:
    """All perfect matchings of ``points`` as lists of increasing pairs."""
    pts = list(points)
    if not pts:
        yield []
        return
    first = pts[0]
    for idx in range(1, len(pts)):
        rest = pts[1:idx] + pts[idx + 1 :]
        for tail in iter_perfect_matchings(rest):
            yield [(first, pts[idx])] + tail
