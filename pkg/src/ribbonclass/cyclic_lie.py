"""Cyclic words, the bracket, Chevalley-Eilenberg chains and Feynman amplitudes.

Letters are integer indices into a :class:`LetterSpace`, an even graded-skew
pairing on a super basis.  The symplectic letter space on ``2n|m`` letters
orders its basis as ``p1..pn, q1..qn, x1..xm`` with ``<p_i, q_i> = 1`` and
``<x_j, x_j> = d_j`` (``d_j = 1`` unless another odd diagonal is requested).

A word ``w`` of length ``k`` represents its class in the cyclic coinvariants;
the rotation ``z`` acts by ``z . (w0 w1 .. w_{k-1}) = +-(w1 .. w_{k-1} w0)``.
"""
from __future__ import annotations

import itertools
import re
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .graph_complex import GraphChain
from .ribbon_graph import RibbonGraph, canonical_form
from .super_core import (
    GradedTensor,
    InnerProduct,
    SuperSpace,
    format_rational,
    koszul_sign,
    parse_rational,
    perm_sign,
)

Word = tuple[int, ...]
Monomial = tuple[Word, ...]

__all__ = [
    "LetterSpace",
    "CyclicWord",
    "CEChain",
    "canonical_rotation",
    "rotation_sign",
    "norm_rotations",
    "bracket",
    "ce_differential",
    "adjoint_action",
    "eps_TN",
    "sigma_of_chords",
    "beta_amplitude",
    "contract",
    "feynman_fully_ordered",
    "feynman_oriented",
    "ce_graph_pairing",
    "I_map",
    "stable_product",
]


# ---------------------------------------------------------------- letters


class LetterSpace:
    """Super basis with an even graded-skew nondegenerate pairing."""

    def __init__(self, form: InnerProduct):
        if not form.is_even():
            raise ValueError("pairing is not even")
        if not form.is_graded_skew():
            raise ValueError("pairing is not graded-skew")
        self.form = form
        self.space = form.space
        self.parities = form.space.parities
        self.labels = form.space.labels
        self.pair = form.sparse()
        partners: list[list[int]] = [[] for _ in self.labels]
        for (a, b) in self.pair:
            partners[a].append(b)
        self.partners = tuple(tuple(p) for p in partners)
        self._index = {l: i for i, l in enumerate(self.labels)}

    @classmethod
    def symplectic(cls, n: int, m: int, odd_diagonal: Sequence[Fraction] | None = None) -> "LetterSpace":
        space = SuperSpace.symplectic(n, m)
        return cls(InnerProduct.canonical(space, odd_diagonal))

    @property
    def hyperbolic(self) -> int | None:
        return self.space.hyperbolic

    @property
    def odd_count(self) -> int:
        return self.space.odd_count

    @property
    def odd_diagonal(self) -> tuple[Fraction, ...]:
        n = self.hyperbolic or 0
        return tuple(self.form.matrix[2 * n + j][2 * n + j] for j in range(self.odd_count))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LetterSpace) and self.form == other.form

    def __hash__(self) -> int:
        return hash(self.form)

    def __repr__(self) -> str:
        return f"LetterSpace({' '.join(self.labels)})"

    def letter(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ValueError(f"unknown letter {label!r}") from None

    def parse_word(self, text: str) -> Word:
        return tuple(self.letter(tok) for tok in text.split())

    def format_word(self, word: Word) -> str:
        return " ".join(self.labels[a] for a in word)

    def word_parity(self, word: Word) -> int:
        par = self.parities
        return sum(par[a] for a in word) & 1

    def stable_embedding(self, other: "LetterSpace") -> tuple["LetterSpace", list[int], list[int]]:
        """Combined symplectic space and the letter maps from ``self`` and ``other``."""
        n1, n2 = self.hyperbolic, other.hyperbolic
        if n1 is None or n2 is None:
            raise ValueError("stable product needs symplectically tagged spaces")
        m1, m2 = self.odd_count, other.odd_count
        big = LetterSpace.symplectic(n1 + n2, m1 + m2, self.odd_diagonal + other.odd_diagonal)
        n = n1 + n2
        left = [i for i in range(n1)] + [n + i for i in range(n1)] + [2 * n + j for j in range(m1)]
        right = (
            [n1 + i for i in range(n2)]
            + [n + n1 + i for i in range(n2)]
            + [2 * n + m1 + j for j in range(m2)]
        )
        return big, left, right


# ---------------------------------------------------------------- cyclic words


def rotation_sign(word: Word, r: int, parities: Sequence[int]) -> int:
    """Sign of ``z**r`` acting on ``word`` (moves the first ``r`` letters to the end)."""
    head = sum(parities[a] for a in word[:r]) & 1
    tail = sum(parities[a] for a in word[r:]) & 1
    return -1 if head & tail else 1


def canonical_rotation(word: Word, parities: Sequence[int]) -> tuple[Word, int] | None:
    """Least rotation of ``word`` and the sign relating them, or None if the class is zero."""
    k = len(word)
    if k == 0:
        return word, 1
    best = None
    best_sign = 1
    for r in range(k):
        rot = word[r:] + word[:r]
        if best is None or rot < best:
            best = rot
            best_sign = rotation_sign(word, r, parities)
    # a word equal to minus one of its own rotations vanishes
    for r in range(1, k):
        if best[r:] + best[:r] == best and rotation_sign(best, r, parities) < 0:
            return None
    return best, best_sign


def norm_rotations(word: Word, parities: Sequence[int]) -> list[tuple[Word, int]]:
    """The terms of ``N . word``: every ``z**r . word`` with its sign."""
    k = len(word)
    if k == 0:
        return [(word, 1)]
    return [(word[r:] + word[:r], rotation_sign(word, r, parities)) for r in range(k)]


class CyclicWord:
    """Rational combination of cyclic words over a letter space."""

    __slots__ = ("letters", "terms")

    def __init__(self, letters: LetterSpace, terms: Mapping[Word, Fraction | int] | None = None):
        self.letters = letters
        self.terms: dict[Word, Fraction] = {}
        for w, c in (terms or {}).items():
            self.add(tuple(w), c)

    @classmethod
    def parse(cls, letters: LetterSpace, text: str, coeff: Fraction | int = 1) -> "CyclicWord":
        return cls(letters, {letters.parse_word(text): coeff})

    def add(self, word: Word, coeff: Fraction | int = 1) -> None:
        coeff = Fraction(coeff)
        if not coeff:
            return
        canon = canonical_rotation(word, self.letters.parities)
        if canon is None:
            return
        w, s = canon
        value = self.terms.get(w, Fraction(0)) + s * coeff
        if value:
            self.terms[w] = value
        else:
            self.terms.pop(w, None)

    def copy(self) -> "CyclicWord":
        out = CyclicWord(self.letters)
        out.terms = dict(self.terms)
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CyclicWord) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"CyclicWord({self.format()})"

    def __add__(self, other: "CyclicWord") -> "CyclicWord":
        out = self.copy()
        for w, c in other.terms.items():
            value = out.terms.get(w, Fraction(0)) + c
            if value:
                out.terms[w] = value
            else:
                out.terms.pop(w, None)
        return out

    def scale(self, factor: Fraction | int) -> "CyclicWord":
        factor = Fraction(factor)
        out = CyclicWord(self.letters)
        if factor:
            out.terms = {w: c * factor for w, c in self.terms.items()}
        return out

    def __neg__(self) -> "CyclicWord":
        return self.scale(-1)

    def __sub__(self, other: "CyclicWord") -> "CyclicWord":
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.terms

    def parity(self) -> int:
        found = {self.letters.word_parity(w) for w in self.terms}
        if len(found) > 1:
            raise ValueError("inhomogeneous cyclic word")
        return found.pop() if found else 0

    def truncate(self, max_length: int) -> "CyclicWord":
        out = CyclicWord(self.letters)
        out.terms = {w: c for w, c in self.terms.items() if len(w) <= max_length}
        return out

    def by_length(self, length: int) -> "CyclicWord":
        out = CyclicWord(self.letters)
        out.terms = {w: c for w, c in self.terms.items() if len(w) == length}
        return out

    def relabel(self, letters: LetterSpace, mapping: Sequence[int]) -> "CyclicWord":
        out = CyclicWord(letters)
        for w, c in self.terms.items():
            out.add(tuple(mapping[a] for a in w), c)
        return out

    def format(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0])):
            parts.append(f"{format_rational(c)} * [{self.letters.format_word(w)}]")
        return " + ".join(parts)


def _bracket_words(letters: LetterSpace, a: Word, b: Word) -> Iterator[tuple[Word, Fraction]]:
    par = letters.parities
    pair = letters.pair
    k, l = len(a), len(b)
    pa = [par[x] for x in a]
    pb = [par[x] for x in b]
    for i in range(k):
        ai = a[i]
        for j in range(l):
            val = pair.get((ai, b[j]))
            if not val:
                continue
            # z^{i} applied to the word with a_i removed
            before_a, after_a = a[:i], a[i + 1 :]
            sa = sum(pa[:i]) & sum(pa[i + 1 :]) & 1
            before_b, after_b = b[:j], b[j + 1 :]
            sb = sum(pb[:j]) & sum(pb[j + 1 :]) & 1
            p = pa[i] & ((sum(pa[i + 1 :]) + sum(pb[:j])) & 1)
            sign = -1 if (sa ^ sb ^ p) else 1
            yield after_a + before_a + after_b + before_b, sign * val


def bracket(a: CyclicWord, b: CyclicWord) -> CyclicWord:
    """The bracket of cyclic words, summing all pairings of a letter of ``a`` with one of ``b``."""
    if a.letters != b.letters:
        raise ValueError("brackets need a common letter space")
    out = CyclicWord(a.letters)
    for wa, ca in a.terms.items():
        for wb, cb in b.terms.items():
            for w, v in _bracket_words(a.letters, wa, wb):
                out.add(w, ca * cb * v)
    return out


# ---------------------------------------------------------------- CE chains


class CEChain:
    """Rational combination of exterior monomials of cyclic words.

    Each monomial is a tuple of canonical words sorted by ``(len, word)``;
    the exterior relation ``g ^ h = -(-1)^{|g||h|} h ^ g`` fixes the sign.
    """

    __slots__ = ("letters", "terms")

    def __init__(self, letters: LetterSpace, terms: Mapping[Monomial, Fraction | int] | None = None):
        self.letters = letters
        self.terms: dict[Monomial, Fraction] = {}
        for mono, c in (terms or {}).items():
            self.add_monomial(tuple(tuple(w) for w in mono), c)

    @classmethod
    def one(cls, letters: LetterSpace) -> "CEChain":
        return cls(letters, {(): 1})

    @classmethod
    def wedge(cls, *factors: CyclicWord) -> "CEChain":
        if not factors:
            raise ValueError("wedge needs at least one factor; use CEChain.one for the unit")
        letters = factors[0].letters
        out = cls(letters)
        for combo in itertools.product(*(f.terms.items() for f in factors)):
            coeff = Fraction(1)
            for _, c in combo:
                coeff *= c
            out.add_monomial(tuple(w for w, _ in combo), coeff)
        return out

    def add_monomial(self, words: Sequence[Word], coeff: Fraction | int = 1) -> None:
        """Add ``coeff * w1 ^ ... ^ wm`` with the words reduced to canonical rotations."""
        coeff = Fraction(coeff)
        if not coeff:
            return
        par = self.letters.parities
        canon = []
        for w in words:
            cw = canonical_rotation(tuple(w), par)
            if cw is None:
                return
            canon.append(cw[0])
            coeff *= cw[1]
        order = sorted(range(len(canon)), key=lambda r: (len(canon[r]), canon[r]))
        perm = [0] * len(canon)
        for pos, r in enumerate(order):
            perm[r] = pos
        sorted_words = tuple(canon[r] for r in order)
        for x, y in zip(sorted_words, sorted_words[1:]):
            # g ^ g = -(-1)^{|g|} g ^ g vanishes for even words
            if x == y and self.letters.word_parity(x) == 0:
                return
        sign = perm_sign(perm) * koszul_sign(perm, [self.letters.word_parity(w) for w in canon])
        value = self.terms.get(sorted_words, Fraction(0)) + sign * coeff
        if value:
            self.terms[sorted_words] = value
        else:
            self.terms.pop(sorted_words, None)

    def copy(self) -> "CEChain":
        out = CEChain(self.letters)
        out.terms = dict(self.terms)
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CEChain) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"CEChain({len(self.terms)} monomials)"

    def __add__(self, other: "CEChain") -> "CEChain":
        out = self.copy()
        for mono, c in other.terms.items():
            value = out.terms.get(mono, Fraction(0)) + c
            if value:
                out.terms[mono] = value
            else:
                out.terms.pop(mono, None)
        return out

    def scale(self, factor: Fraction | int) -> "CEChain":
        factor = Fraction(factor)
        out = CEChain(self.letters)
        if factor:
            out.terms = {m: c * factor for m, c in self.terms.items()}
        return out

    def __neg__(self) -> "CEChain":
        return self.scale(-1)

    def __sub__(self, other: "CEChain") -> "CEChain":
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.terms

    def __xor__(self, other: "CEChain") -> "CEChain":
        """Exterior product of chains over the same letters."""
        out = CEChain(self.letters)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out.add_monomial(m1 + m2, c1 * c2)
        return out

    def degree_part(self, m: int) -> "CEChain":
        out = CEChain(self.letters)
        out.terms = {mono: c for mono, c in self.terms.items() if len(mono) == m}
        return out

    def relabel(self, letters: LetterSpace, mapping: Sequence[int]) -> "CEChain":
        out = CEChain(letters)
        for mono, c in self.terms.items():
            out.add_monomial([tuple(mapping[a] for a in w) for w in mono], c)
        return out

    def format(self) -> str:
        lines = []
        for mono, c in sorted(self.terms.items()):
            body = " ^ ".join(self.letters.format_word(w) for w in mono)
            lines.append(f"{format_rational(c)} * [{body}]")
        return "\n".join(lines)

    @classmethod
    def parse(cls, letters: LetterSpace, text: str) -> "CEChain":
        """Parse lines ``coef * [w1 ^ w2 ^ ...]``."""
        out = cls(letters)
        for raw in text.strip().splitlines():
            line = raw.strip()
            if not line:
                continue
            m = re.match(r"^(\S+)\s*\*\s*\[(.*)\]$", line)
            if not m:
                raise ValueError(f"malformed chain line: {line!r}")
            words = [letters.parse_word(w) for w in m.group(2).split("^") if w.strip()]
            out.add_monomial(words, parse_rational(m.group(1)))
        return out


def _word_chain(letters: LetterSpace, word: Word, coeff: Fraction) -> CyclicWord:
    return CyclicWord(letters, {word: coeff})


def ce_differential(x: CEChain) -> CEChain:
    """Chevalley-Eilenberg differential: brackets of pairs moved to the front."""
    letters = x.letters
    out = CEChain(letters)
    for mono, c in x.terms.items():
        par = [letters.word_parity(w) for w in mono]
        m = len(mono)
        for i in range(m):
            for j in range(i + 1, m):
                p = par[i] * sum(par[:i]) + par[j] * sum(par[:j]) + par[i] * par[j] + (i + 1) + (j + 1) - 1
                sign = -1 if p % 2 else 1
                rest = mono[:i] + mono[i + 1 : j] + mono[j + 1 :]
                for w, v in _bracket_words(letters, mono[i], mono[j]):
                    out.add_monomial((w,) + rest, sign * c * v)
    return out


def adjoint_action(g: CyclicWord, x: CEChain) -> CEChain:
    """``ad_g`` extended to the exterior algebra as a derivation of parity ``|g|``."""
    letters = x.letters
    out = CEChain(letters)
    for wg, cg in g.terms.items():
        pg = letters.word_parity(wg)
        for mono, c in x.terms.items():
            before = 0
            for j, w in enumerate(mono):
                sign = -1 if pg & before else 1
                for nw, v in _bracket_words(letters, wg, w):
                    out.add_monomial(mono[:j] + (nw,) + mono[j + 1 :], sign * c * cg * v)
                before ^= letters.word_parity(w)
    return out


# ---------------------------------------------------------------- amplitudes

Blocks = dict[tuple[Word, ...], Fraction]


def eps_TN(x: CEChain) -> Blocks:
    """``sum sgn(s) s . [(N g1) (x) ... (x) (N gm)]`` as a map from block tuples to coefficients."""
    letters = x.letters
    par = letters.parities
    out: Blocks = {}
    for mono, c in x.terms.items():
        m = len(mono)
        lie_par = [letters.word_parity(w) for w in mono]
        rotations = [norm_rotations(w, par) for w in mono]
        for perm in itertools.permutations(range(m)):
            sign = perm_sign(perm) * koszul_sign(perm, lie_par)
            inv = [0] * m
            for r, s in enumerate(perm):
                inv[s] = r
            for combo in itertools.product(*(rotations[inv[s]] for s in range(m))):
                coeff = c * sign
                for _, s_ in combo:
                    coeff *= s_
                key = tuple(w for w, _ in combo)
                value = out.get(key, Fraction(0)) + coeff
                if value:
                    out[key] = value
                else:
                    out.pop(key, None)
    return out


def sigma_of_chords(chords: Sequence[tuple[int, int]]) -> tuple[int, ...]:
    """The permutation sending ``i_r`` to ``2r`` and ``j_r`` to ``2r + 1`` (0-based)."""
    n = 2 * len(chords)
    sigma = [-1] * n
    for r, (a, b) in enumerate(chords):
        sigma[a] = 2 * r
        sigma[b] = 2 * r + 1
    if sorted(sigma) != list(range(n)):
        raise ValueError("chords do not partition the positions")
    return tuple(sigma)


def beta_amplitude(
    chords: Sequence[tuple[int, int]],
    t: GradedTensor,
    pairing: Mapping[tuple[int, int], Fraction] | LetterSpace,
) -> Fraction:
    """Permute by the chord permutation (Koszul signs) then pair consecutive slots."""
    if t.order != 2 * len(chords):
        raise ValueError("tensor order must be twice the number of chords")
    pair = pairing.pair if isinstance(pairing, LetterSpace) else pairing
    sigma = sigma_of_chords(chords)
    total = Fraction(0)
    par = t.parities
    for idx, c in t.coeffs.items():
        val = Fraction(c)
        for a, b in chords:
            v = pair.get((idx[a], idx[b]))
            if not v:
                val = Fraction(0)
                break
            val *= v
        if val:
            total += koszul_sign(sigma, [par[i] for i in idx]) * val
    return total


def contract(
    graph: RibbonGraph,
    blocks: Sequence[Sequence[tuple[Word, Fraction | int]]],
    pairing: Mapping[tuple[int, int], Fraction],
    parities: Sequence[int],
) -> Fraction:
    """Feynman amplitude of a fully ordered graph on a sum of product tensors.

    ``blocks[v]`` lists ``(word, coefficient)`` alternatives placed at vertex
    ``v``; the result is the sum over all choices of the product of the
    coefficients times the chord amplitude of the concatenated word.

    Vertices are visited in order.  At each vertex the letters are found
    either by scanning its block or, when the block is large, by choosing
    paired letters on its still open edges and looking the word up.
    """
    m = len(graph.valences)
    if len(blocks) != m:
        raise ValueError("one block per vertex is required")
    n = graph.num_half_edges
    starts = graph.starts()
    sigma = sigma_of_chords(graph.chords)
    vof = graph.vertex_of()
    tables = []
    for v in range(m):
        table: dict[Word, Fraction] = {}
        for w, c in blocks[v]:
            if len(w) == graph.valences[v] and c:
                w = tuple(w)
                table[w] = table.get(w, Fraction(0)) + Fraction(c)
        table = {w: c for w, c in table.items() if c}
        if not table:
            return Fraction(0)
        tables.append(table)
    pairs = [(k, Fraction(val)) for k, val in pairing.items() if val]
    by_tail: dict[int, list[tuple[int, Fraction]]] = {}
    by_head: dict[int, list[tuple[int, Fraction]]] = {}
    for (x, y), val in pairs:
        by_tail.setdefault(x, []).append((y, val))
        by_head.setdefault(y, []).append((x, val))
    fan = max([len(o) for o in by_tail.values()] + [len(o) for o in by_head.values()] + [1])

    # plan: which chords each vertex assigns and which it merely checks
    assigned = [False] * n
    paid = [False] * len(graph.chords)
    plans = []
    for v in range(m):
        touching = [r for r, (a, b) in enumerate(graph.chords) if not paid[r] and v in (vof[a], vof[b])]
        fresh = [r for r in touching if not assigned[graph.chords[r][0]] and not assigned[graph.chords[r][1]]]
        half = [r for r in touching if r not in fresh]
        preset = [e for e in range(starts[v], starts[v] + graph.valences[v]) if assigned[e]]
        if len(pairs) ** len(fresh) * fan ** len(half) < len(tables[v]):
            plans.append(("guided", [graph.chords[r] for r in fresh], [graph.chords[r] for r in half]))
            for r in touching:
                paid[r] = True
                assigned[graph.chords[r][0]] = assigned[graph.chords[r][1]] = True
        else:
            for e in range(starts[v], starts[v] + graph.valences[v]):
                assigned[e] = True
            checks = [graph.chords[r] for r in touching if all(assigned[e] for e in graph.chords[r])]
            for r, (a, b) in enumerate(graph.chords):
                if (a, b) in checks:
                    paid[r] = True
            plans.append(("scan", checks, [e - starts[v] for e in preset]))
    letters = [-1] * n
    total = Fraction(0)

    def leaf(acc: Fraction) -> None:
        nonlocal total
        total += koszul_sign(sigma, [parities[x] for x in letters]) * acc

    def rec(v: int, acc: Fraction) -> None:
        if v == m:
            leaf(acc)
            return
        mode, first, second = plans[v]
        s = starts[v]
        k = graph.valences[v]
        if mode == "scan":
            for word, c in tables[v].items():
                if any(word[i] != letters[s + i] for i in second):
                    continue
                val = acc * c
                saved = letters[s : s + k]
                letters[s : s + k] = word
                for a, b in first:
                    pv = pairing.get((letters[a], letters[b]))
                    if not pv:
                        val = None
                        break
                    val *= pv
                if val is not None:
                    rec(v + 1, val)
                letters[s : s + k] = saved
            return
        chords = first + second
        nfresh = len(first)

        def assign(r: int, val: Fraction) -> None:
            if r == len(chords):
                c = tables[v].get(tuple(letters[s : s + k]))
                if c:
                    rec(v + 1, val * c)
                return
            a, b = chords[r]
            if r < nfresh:
                for (x, y), pv in pairs:
                    letters[a], letters[b] = x, y
                    assign(r + 1, val * pv)
                letters[a] = letters[b] = -1
            elif vof[a] != v:
                for y, pv in by_tail.get(letters[a], ()):
                    letters[b] = y
                    assign(r + 1, val * pv)
                letters[b] = -1
            else:
                for x, pv in by_head.get(letters[b], ()):
                    letters[a] = x
                    assign(r + 1, val * pv)
                letters[a] = -1

        assign(0, acc)

    rec(0, Fraction(1))
    return total


def feynman_fully_ordered(graph: RibbonGraph, tensor: Blocks, letters: LetterSpace) -> Fraction:
    """Amplitude of a fully ordered graph on a block tensor; summands of the wrong type give 0."""
    total = Fraction(0)
    for key, c in tensor.items():
        if tuple(len(w) for w in key) != graph.valences:
            continue
        blocks = [[(w, Fraction(1))] for w in key]
        total += c * contract(graph, blocks, letters.pair, letters.parities)
    return total


def feynman_oriented(graph: RibbonGraph, x: CEChain) -> Fraction:
    """Amplitude of the oriented graph on a chain, via the norm and antisymmetrization.

    Equivalent to ``feynman_fully_ordered(graph, eps_TN(x))`` but sums over
    type-matching block permutations directly.
    """
    letters = x.letters
    par = letters.parities
    m = graph.num_vertices
    total = Fraction(0)
    for mono, c in x.terms.items():
        if len(mono) != m:
            continue
        if sorted(len(w) for w in mono) != sorted(graph.valences):
            continue
        lie_par = [letters.word_parity(w) for w in mono]
        rotations = [norm_rotations(w, par) for w in mono]
        for inv in _matching_assignments([len(w) for w in mono], graph.valences):
            perm = [0] * m
            for s, r in enumerate(inv):
                perm[r] = s
            sign = perm_sign(perm) * koszul_sign(perm, lie_par)
            blocks = [rotations[inv[s]] for s in range(m)]
            total += sign * c * contract(graph, blocks, letters.pair, par)
    return total


def _matching_assignments(lengths: Sequence[int], valences: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Orderings ``inv`` of the factors with ``lengths[inv[s]] == valences[s]``."""
    m = len(valences)
    used = [False] * m
    chosen: list[int] = []

    def rec(s: int):
        if s == m:
            yield tuple(chosen)
            return
        for r in range(m):
            if not used[r] and lengths[r] == valences[s]:
                used[r] = True
                chosen.append(r)
                yield from rec(s + 1)
                chosen.pop()
                used[r] = False

    yield from rec(0)


def ce_graph_pairing(x: CEChain, graph: RibbonGraph) -> Fraction:
    """``F_graph(x) / |Aut(graph)|``."""
    cf = canonical_form(graph)
    if cf.is_zero:
        return Fraction(0)
    return feynman_oriented(graph, x) / cf.aut_order


def _matchings_nonzero(word: Word, pair: Mapping[tuple[int, int], Fraction]) -> Iterator[list[tuple[int, int]]]:
    n = len(word)
    used = [False] * n
    chosen: list[tuple[int, int]] = []

    def rec():
        try:
            first = used.index(False)
        except ValueError:
            yield list(chosen)
            return
        used[first] = True
        for b in range(first + 1, n):
            if not used[b] and pair.get((word[first], word[b])):
                used[b] = True
                chosen.append((first, b))
                yield from rec()
                chosen.pop()
                used[b] = False
        used[first] = False

    yield from rec()


def I_map(x: CEChain) -> GraphChain:
    """Sum over chord diagrams of the amplitude times the corresponding graph."""
    letters = x.letters
    par = letters.parities
    out = GraphChain()
    for mono, c in x.terms.items():
        lengths = [len(w) for w in mono]
        if any(k < 3 for k in lengths):
            raise ValueError("the graph map needs words of length at least 3")
        flat = tuple(a for w in mono for a in w)
        if len(flat) % 2:
            continue
        parities = [par[a] for a in flat]
        for chords in _matchings_nonzero(flat, letters.pair):
            val = Fraction(c)
            for a, b in chords:
                val *= letters.pair[(flat[a], flat[b])]
            val *= koszul_sign(sigma_of_chords(chords), parities)
            out.add(RibbonGraph(tuple(lengths), tuple(chords)), val)
    return out


def stable_product(x: CEChain, y: CEChain) -> CEChain:
    """Embed both chains into the direct-sum letter space and wedge them."""
    big, left, right = x.letters.stable_embedding(y.letters)
    return x.relabel(big, left) ^ y.relabel(big, right)
