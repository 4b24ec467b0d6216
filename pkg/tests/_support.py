"""Brute-force oracles and random generators shared by the test modules."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from ribbonclass.cyclic_lie import CEChain, LetterSpace
from ribbonclass.ribbon_graph import RibbonGraph
from ribbonclass.super_core import perm_sign
from ribbonclass.tcft import LeggedRibbonGraph


def all_matchings(points):
    if not points:
        yield []
        return
    first, rest = points[0], points[1:]
    for r, other in enumerate(rest):
        for tail in all_matchings(rest[:r] + rest[r + 1 :]):
            yield [(first, other)] + tail


def relabelings(valences):
    """Every (vertex permutation, rotations) as a map on positions, with the permutation sign."""
    starts = list(itertools.accumulate((0,) + tuple(valences[:-1])))
    m = len(valences)
    for perm in itertools.permutations(range(m)):
        if any(valences[perm[v]] != valences[v] for v in range(m)):
            continue
        for rots in itertools.product(*(range(k) for k in valences)):
            phi = [0] * sum(valences)
            for v in range(m):
                k, w = valences[v], perm[v]
                for t in range(k):
                    phi[starts[v] + t] = starts[w] + (t + rots[v]) % k
            yield phi, perm_sign(perm)


def _connected(valences, matching):
    vof = [v for v, k in enumerate(valences) for _ in range(k)]
    parent = list(range(len(valences)))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for a, b in matching:
        parent[find(vof[a])] = find(vof[b])
    return len({find(v) for v in range(len(valences))}) == 1


def naive_classes(i, j):
    """Connected ribbon graph classes with i vertices and j edges, by orbit enumeration.

    Returns (number of classes, number whose automorphisms all preserve orientation).
    """
    classes = nonzero = 0
    for valences in itertools.combinations_with_replacement(range(3, 2 * j + 1), i):
        if sum(valences) != 2 * j:
            continue
        group = list(relabelings(valences))
        seen = set()
        for matching in all_matchings(list(range(2 * j))):
            key = frozenset(frozenset(c) for c in matching)
            if key in seen or not _connected(valences, matching):
                continue
            orbit = set()
            reversing = False
            for phi, sign in group:
                image = frozenset(frozenset((phi[a], phi[b])) for a, b in matching)
                orbit.add(image)
                if image == key:
                    directed = set(matching)
                    flips = sum(1 for a, b in matching if (phi[a], phi[b]) not in directed)
                    if sign * (-1) ** flips == -1:
                        reversing = True
            seen |= orbit
            classes += 1
            nonzero += not reversing
    return classes, nonzero


def brute_automorphisms(graph: RibbonGraph):
    """Automorphism count and whether one reverses orientation, by trying every relabeling."""
    chords = set(graph.chords)
    undirected = {frozenset(c) for c in chords}
    count, reversing = 0, False
    for phi, sign in relabelings(graph.valences):
        if {frozenset((phi[a], phi[b])) for a, b in graph.chords} != undirected:
            continue
        count += 1
        flips = sum(1 for a, b in graph.chords if (phi[a], phi[b]) not in chords)
        if sign * (-1) ** flips == -1:
            reversing = True
    return count, reversing


def shuffle_graph(graph: RibbonGraph, rng: random.Random) -> tuple[RibbonGraph, int]:
    """Random representative of the same graph and its sign relative to ``graph``."""
    m = len(graph.valences)
    order = list(range(m))
    rng.shuffle(order)
    starts = graph.starts()
    new_pos, pos = {}, 0
    for v in order:
        k = graph.valences[v]
        r = rng.randrange(k)
        for t in range(k):
            new_pos[starts[v] + (r + t) % k] = pos
            pos += 1
    chords, flips = [], 0
    for a, b in graph.chords:
        if rng.random() < 0.5:
            chords.append((new_pos[b], new_pos[a]))
            flips += 1
        else:
            chords.append((new_pos[a], new_pos[b]))
    rng.shuffle(chords)
    ranks = {v: r for r, v in enumerate(order)}
    perm = [ranks[v] for v in range(m)]
    return RibbonGraph(tuple(graph.valences[v] for v in order), tuple(chords)), perm_sign(perm) * (-1) ** flips


def shuffle_legged(graph: LeggedRibbonGraph, rng: random.Random) -> tuple[LeggedRibbonGraph, int]:
    """Random representative and its edge-order sign relative to ``graph``."""
    order = list(range(graph.num_vertices))
    rng.shuffle(order)
    starts = graph.starts()
    new_pos, pos = {}, 0
    for v in order:
        k = graph.valences[v]
        r = rng.randrange(k)
        for t in range(k):
            new_pos[starts[v] + (r + t) % k] = pos
            pos += 1
    idx = list(range(graph.num_edges))
    rng.shuffle(idx)
    chords, flips = [], 0
    for r in idx:
        a, b = graph.chords[r]
        if rng.random() < 0.5:
            chords.append((new_pos[b], new_pos[a]))
            flips += 1
        else:
            chords.append((new_pos[a], new_pos[b]))
    perm = [0] * len(idx)
    for pos_new, r in enumerate(idx):
        perm[r] = pos_new
    fix = lambda h: new_pos[h] if h >= 0 else h  # noqa: E731
    shuffled = LeggedRibbonGraph(
        tuple(graph.valences[v] for v in order),
        tuple(chords),
        tuple(fix(h) for h in graph.ins),
        tuple(fix(h) for h in graph.outs),
    )
    return shuffled, perm_sign(perm) * (-1) ** flips


def paired_letters(letters: LetterSpace, count: int, rng: random.Random) -> list[int]:
    """``count`` letters (even) arranged so that a random perfect pairing of them is nonzero."""
    pos = list(range(count))
    rng.shuffle(pos)
    out = [0] * count
    partners = sorted(letters.pair)
    for r in range(0, count, 2):
        a, b = rng.choice(partners)
        out[pos[r]], out[pos[r + 1]] = a, b
    return out


def random_monomial(letters: LetterSpace, rng: random.Random, words: int, total: int):
    while True:
        cuts = sorted(rng.sample(range(1, total), words - 1)) if words > 1 else []
        lengths = [b - a for a, b in zip([0] + cuts, cuts + [total])]
        if min(lengths) >= 3:
            break
    flat = paired_letters(letters, total, rng)
    out, p = [], 0
    for k in lengths:
        out.append(tuple(flat[p : p + k]))
        p += k
    return out


def random_chain(letters: LetterSpace, rng: random.Random, max_monomials: int = 4, max_letters: int = 12) -> CEChain:
    """A nonzero chain of up to ``max_monomials`` monomials with at most ``max_letters`` letters each."""
    while True:
        x = CEChain(letters)
        for _ in range(rng.randint(1, max_monomials)):
            total = rng.choice([t for t in range(6, max_letters + 1, 2)])
            words = rng.randint(1, total // 3)
            x.add_monomial(random_monomial(letters, rng, words, total), Fraction(rng.randint(-3, 3), rng.randint(1, 2)))
        if not x.is_zero():
            return x
