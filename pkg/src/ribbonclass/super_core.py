"""Exact scalars, super vector spaces, Koszul signs and graded tensors.

Conventions used throughout the package:

* Scalars are :class:`fractions.Fraction`.
* A permutation of ``k`` slots is a tuple ``perm`` in one-line notation on
  ``0..k-1``; it acts on the left by sending the factor in slot ``r`` to slot
  ``perm[r]``.  With this convention ``(sigma * tau) . x = sigma . (tau . x)``.
* The generator ``z`` of the cyclic group sends ``r`` to ``r - 1``, so
  ``z . (x0 x1 ... x_{k-1}) = +-(x1 ... x_{k-1} x0)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Sequence

import flint

Scalar = Fraction
Perm = tuple[int, ...]

__all__ = [
    "Scalar",
    "parse_rational",
    "format_rational",
    "perm_compose",
    "perm_inverse",
    "perm_sign",
    "cyclic_perm",
    "block_permutation",
    "koszul_sign",
    "SuperSpace",
    "InnerProduct",
    "GradedTensor",
    "permute_tensor",
    "apply_symmetrizer",
    "DarbouxResult",
    "darboux_basis",
    "inverse_pairing",
]


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"a/b"`` or ``"a"`` into a reduced fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    if not s:
        raise ValueError("empty rational literal")
    if "/" in s:
        num, den = s.split("/", 1)
        value = Fraction(int(num), int(den))
    else:
        value = Fraction(int(s))
    return value


def format_rational(value: Fraction | int) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# ---------------------------------------------------------------- permutations


def perm_compose(sigma: Sequence[int], tau: Sequence[int]) -> Perm:
    """Return ``sigma o tau`` (apply ``tau`` first)."""
    return tuple(sigma[t] for t in tau)


def perm_inverse(sigma: Sequence[int]) -> Perm:
    inv = [0] * len(sigma)
    for r, s in enumerate(sigma):
        inv[s] = r
    return tuple(inv)


def perm_sign(sigma: Sequence[int]) -> int:
    seen = [False] * len(sigma)
    sign = 1
    for start in range(len(sigma)):
        if seen[start]:
            continue
        length = 0
        r = start
        while not seen[r]:
            seen[r] = True
            r = sigma[r]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _check_perm(perm: Sequence[int]) -> None:
    if sorted(perm) != list(range(len(perm))):
        raise ValueError(f"not a permutation of 0..{len(perm) - 1}: {tuple(perm)}")


def cyclic_perm(k: int, power: int = 1) -> Perm:
    """The permutation ``z_k ** power``."""
    return tuple((r - power) % k for r in range(k))


def block_permutation(perm: Sequence[int], sizes: Sequence[int]) -> Perm:
    """Lift a permutation of blocks to a permutation of their entries.

    Block ``r`` (of length ``sizes[r]``) is moved to block position
    ``perm[r]``; entries keep their order inside a block.
    """
    _check_perm(perm)
    if len(perm) != len(sizes):
        raise ValueError("block permutation and sizes differ in length")
    inv = perm_inverse(perm)
    new_start = {}
    pos = 0
    for s in range(len(perm)):
        new_start[inv[s]] = pos
        pos += sizes[inv[s]]
    out = []
    for r, size in enumerate(sizes):
        out.extend(new_start[r] + i for i in range(size))
    return tuple(out)


def koszul_sign(perm: Sequence[int], parities: Sequence[int]) -> int:
    """Sign picked up when factors of the given parities are moved by ``perm``.

    Every pair of odd factors whose relative order is reversed contributes -1.
    """
    if len(perm) != len(parities):
        raise ValueError("permutation and parity list differ in length")
    odd = [perm[r] for r, p in enumerate(parities) if p & 1]
    inversions = 0
    for a in range(len(odd)):
        oa = odd[a]
        for b in range(a + 1, len(odd)):
            if oa > odd[b]:
                inversions += 1
    return -1 if inversions & 1 else 1


# ---------------------------------------------------------------- spaces


@dataclass(frozen=True)
class SuperSpace:
    """An ordered basis with a parity (0 even, 1 odd) per label.

    ``hyperbolic`` is the number ``n`` of (p, q) pairs when the space is
    symplectically tagged as ``p_1..p_n, q_1..q_n, x_1..x_m``; otherwise None.
    """

    labels: tuple[str, ...]
    parities: tuple[int, ...]
    hyperbolic: int | None = None

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.parities):
            raise ValueError("labels and parities differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("basis labels must be distinct")
        if any(p not in (0, 1) for p in self.parities):
            raise ValueError("parities must be 0 or 1")
        if self.hyperbolic is not None:
            n = self.hyperbolic
            if any(self.parities[i] for i in range(2 * n)) or not all(
                self.parities[2 * n :]
            ):
                raise ValueError("tagged space must be p,q even then x odd")

    @classmethod
    def symplectic(cls, n: int, m: int) -> "SuperSpace":
        labels = (
            tuple(f"p{i + 1}" for i in range(n))
            + tuple(f"q{i + 1}" for i in range(n))
            + tuple(f"x{i + 1}" for i in range(m))
        )
        return cls(labels, (0,) * (2 * n) + (1,) * m, hyperbolic=n)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def odd_count(self) -> int:
        return sum(self.parities)

    def index(self, label: str) -> int:
        return self.labels.index(label)


class InnerProduct:
    """Bilinear form on a :class:`SuperSpace`, stored as a dense rational matrix."""

    __slots__ = ("space", "matrix")

    def __init__(self, space: SuperSpace, matrix: Sequence[Sequence[Fraction | int]]):
        n = space.dim
        if len(matrix) != n or any(len(row) != n for row in matrix):
            raise ValueError("pairing matrix must be square of the space dimension")
        self.space = space
        self.matrix = tuple(tuple(Fraction(v) for v in row) for row in matrix)

    @classmethod
    def canonical(cls, space: SuperSpace, odd_diagonal: Sequence[Fraction] | None = None):
        """The form ``<p_i,q_j> = <x_i,x_j> = delta_ij`` on a tagged space.

        ``odd_diagonal`` replaces the unit entries on the odd block.
        """
        if space.hyperbolic is None:
            raise ValueError("canonical form needs a symplectically tagged space")
        n = space.hyperbolic
        m = space.dim - 2 * n
        diag = [Fraction(1)] * m if odd_diagonal is None else [Fraction(d) for d in odd_diagonal]
        mat = [[Fraction(0)] * space.dim for _ in range(space.dim)]
        for i in range(n):
            mat[i][n + i] = Fraction(1)
            mat[n + i][i] = Fraction(-1)
        for j in range(m):
            mat[2 * n + j][2 * n + j] = diag[j]
        return cls(space, mat)

    def __call__(self, a: int, b: int) -> Fraction:
        return self.matrix[a][b]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, InnerProduct)
            and self.space == other.space
            and self.matrix == other.matrix
        )

    def __hash__(self) -> int:
        return hash((self.space, self.matrix))

    def __repr__(self) -> str:
        return f"InnerProduct({self.space.labels}, {[[format_rational(v) for v in r] for r in self.matrix]})"

    def is_even(self) -> bool:
        par = self.space.parities
        return all(
            self.matrix[a][b] == 0
            for a in range(self.space.dim)
            for b in range(self.space.dim)
            if par[a] != par[b]
        )

    def is_graded_skew(self) -> bool:
        par = self.space.parities
        n = self.space.dim
        for a in range(n):
            for b in range(n):
                sign = 1 if par[a] & par[b] else -1
                if self.matrix[a][b] != sign * self.matrix[b][a]:
                    return False
        return True

    def is_nondegenerate(self) -> bool:
        return _rank(self.matrix) == self.space.dim

    def sparse(self) -> dict[tuple[int, int], Fraction]:
        return {
            (a, b): v
            for a, row in enumerate(self.matrix)
            for b, v in enumerate(row)
            if v
        }


def _rank(matrix: Sequence[Sequence[Fraction]]) -> int:
    rows = [list(r) for r in matrix]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pr = rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / pr[col]
                rows[r] = [x - f * y for x, y in zip(rows[r], pr)]
        rank += 1
    return rank


def _invert(matrix: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    n = len(matrix)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise ValueError("degenerate pairing")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


# ---------------------------------------------------------------- tensors


class GradedTensor:
    """Sparse homogeneous tensor of fixed order over a super basis.

    ``coeffs`` maps index tuples to nonzero rationals.  Every stored tuple has
    total parity ``parity``.
    """

    __slots__ = ("parities", "order", "coeffs", "parity")

    def __init__(
        self,
        parities: Sequence[int],
        order: int,
        coeffs: Mapping[tuple[int, ...], Fraction | int] | None = None,
        parity: int | None = None,
    ):
        self.parities = tuple(parities)
        self.order = order
        clean: dict[tuple[int, ...], Fraction] = {}
        for idx, c in (coeffs or {}).items():
            idx = tuple(idx)
            if len(idx) != order:
                raise ValueError(f"index {idx} does not have order {order}")
            c = Fraction(c)
            if c:
                clean[idx] = clean.get(idx, Fraction(0)) + c
                if not clean[idx]:
                    del clean[idx]
        found = {sum(self.parities[i] for i in idx) & 1 for idx in clean}
        if len(found) > 1:
            raise ValueError("tensor is not homogeneous")
        if parity is None:
            parity = found.pop() if found else 0
        elif found and found != {parity & 1}:
            raise ValueError("tensor parity does not match its support")
        self.coeffs = clean
        self.parity = parity & 1

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GradedTensor)
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __repr__(self) -> str:
        return f"GradedTensor(order={self.order}, terms={len(self.coeffs)}, parity={self.parity})"

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "GradedTensor") -> "GradedTensor":
        if other.order != self.order:
            raise ValueError("order mismatch")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return GradedTensor(self.parities, self.order, out)

    def scale(self, factor: Fraction | int) -> "GradedTensor":
        factor = Fraction(factor)
        return GradedTensor(
            self.parities, self.order, {k: v * factor for k, v in self.coeffs.items()}, self.parity
        )

    def __neg__(self) -> "GradedTensor":
        return self.scale(-1)

    def __sub__(self, other: "GradedTensor") -> "GradedTensor":
        return self + (-other)


def permute_tensor(perm: Sequence[int], t: GradedTensor) -> GradedTensor:
    """Left action of a permutation on a tensor, with Koszul signs."""
    if len(perm) != t.order:
        raise ValueError("permutation order differs from tensor order")
    _check_perm(perm)
    out: dict[tuple[int, ...], Fraction] = {}
    par = t.parities
    for idx, c in t.coeffs.items():
        new = [0] * t.order
        for r, i in enumerate(idx):
            new[perm[r]] = i
        sign = koszul_sign(perm, [par[i] for i in idx])
        key = tuple(new)
        out[key] = out.get(key, Fraction(0)) + sign * c
    return GradedTensor(par, t.order, out, t.parity)


def apply_symmetrizer(kind: str, t: GradedTensor, power: int = 1) -> GradedTensor:
    """Apply the norm ``N``, the antisymmetrizer ``eps`` or ``z**power``.

    ``kind`` is one of ``"norm"``, ``"antisym"`` or ``"cyclic"``.
    """
    k = t.order
    if kind == "cyclic":
        return permute_tensor(cyclic_perm(k, power), t) if k else t
    if kind == "norm":
        acc = GradedTensor(t.parities, k, {}, t.parity)
        for r in range(max(k, 1)):
            acc = acc + (permute_tensor(cyclic_perm(k, r), t) if k else t)
        return acc
    if kind == "antisym":
        acc = GradedTensor(t.parities, k, {}, t.parity)
        for perm in itertools.permutations(range(k)):
            term = permute_tensor(perm, t)
            acc = acc + (term if perm_sign(perm) > 0 else -term)
        return acc
    raise ValueError(f"unknown symmetrizer {kind!r}")


# ---------------------------------------------------------------- Darboux


@dataclass(frozen=True)
class DarbouxResult:
    """Outcome of :func:`darboux_basis`.

    ``change`` has the new basis vectors as columns (in old coordinates), so
    ``change^T . G . change`` is the canonical matrix with ``residual`` on the
    odd diagonal.  ``exact`` is True when every residual entry is 1.
    """

    change: tuple[tuple[Fraction, ...], ...]
    space: SuperSpace
    residual: tuple[Fraction, ...]

    @property
    def exact(self) -> bool:
        return all(d == 1 for d in self.residual)

    def transformed(self, g: InnerProduct) -> InnerProduct:
        b = self.change
        n = len(b)
        mat = [
            [
                sum(
                    (b[i][a] * g.matrix[i][j] * b[j][c] for i in range(n) for j in range(n) if b[i][a] and b[j][c]),
                    Fraction(0),
                )
                for c in range(n)
            ]
            for a in range(n)
        ]
        return InnerProduct(self.space, mat)


def _squarefree_split(value: Fraction) -> tuple[int, Fraction]:
    """Write ``value = s * t**2`` with ``s`` a square-free integer, ``t > 0``."""
    num = value.numerator * value.denominator
    sign = -1 if num < 0 else 1
    s, t = 1, 1
    for prime, power in flint.fmpz(abs(num)).factor():
        prime, power = int(prime), int(power)
        if power % 2:
            s *= prime
        t *= prime ** (power // 2)
    # value = num / den**2 and num = sign * s * t**2
    return sign * s, Fraction(t, value.denominator)


def darboux_basis(g: InnerProduct) -> DarbouxResult:
    """Find a basis putting ``g`` into canonical form.

    Even part: symplectic Gram-Schmidt.  Odd part: orthogonal
    diagonalisation, with each diagonal entry normalised up to rational
    squares; entries that are not squares are reported in ``residual``.
    """
    if not g.is_even():
        raise ValueError("pairing is not even")
    if not g.is_graded_skew():
        raise ValueError("pairing is not graded-skew")
    if not g.is_nondegenerate():
        raise ValueError("degenerate pairing")
    space = g.space
    dim = space.dim
    G = g.matrix

    def pair(u: list[Fraction], v: list[Fraction]) -> Fraction:
        return sum(
            (u[i] * G[i][j] * v[j] for i in range(dim) if u[i] for j in range(dim) if v[j]),
            Fraction(0),
        )

    def unit(i: int) -> list[Fraction]:
        return [Fraction(int(r == i)) for r in range(dim)]

    even = [unit(i) for i in range(dim) if space.parities[i] == 0]
    odd = [unit(i) for i in range(dim) if space.parities[i] == 1]

    ps: list[list[Fraction]] = []
    qs: list[list[Fraction]] = []
    pool = even
    while pool:
        e = pool[0]
        partner = next((f for f in pool[1:] if pair(e, f) != 0), None)
        if partner is None:
            raise ValueError("degenerate pairing")
        c = pair(e, partner)
        p = e
        q = [x / c for x in partner]
        rest = []
        for v in pool[1:]:
            if v is partner:
                continue
            a = pair(q, v)
            b = pair(p, v)
            rest.append([v[i] + a * p[i] - b * q[i] for i in range(dim)])
        ps.append(p)
        qs.append(q)
        pool = [v for v in rest if any(v)]

    xs: list[list[Fraction]] = []
    residual: list[Fraction] = []
    pool = odd
    while pool:
        v = next((u for u in pool if pair(u, u) != 0), None)
        if v is None:
            u, w = next(
                ((u, w) for i, u in enumerate(pool) for w in pool[i + 1 :] if pair(u, w) != 0),
                (None, None),
            )
            if u is None:
                raise ValueError("degenerate pairing")
            # <u + w/(2<u,w>), same> = 1 for a symmetric odd block
            scale = 1 / (2 * pair(u, w))
            v = [a + scale * b for a, b in zip(u, w)]
            pool = [v] + [x for x in pool if x is not u]
        d = pair(v, v)
        s, t = _squarefree_split(d)
        x = [c / t for c in v]
        xs.append(x)
        residual.append(Fraction(s))
        rest = []
        for w in pool:
            if w is v:
                continue
            coef = pair(v, w) / d
            rest.append([w[i] - coef * v[i] for i in range(dim)])
        pool = [w for w in rest if any(w)]

    columns = ps + qs + xs
    change = tuple(tuple(columns[c][r] for c in range(dim)) for r in range(dim))
    n = len(ps)
    tagged = SuperSpace.symplectic(n, len(xs))
    return DarbouxResult(change, tagged, tuple(residual))


def inverse_pairing(g: InnerProduct, dual_labels: Iterable[str] | None = None) -> InnerProduct:
    """The pairing on the dual basis induced by ``x -> <x, ->``.

    With ``G`` the matrix of ``g`` and dual basis ``e^a``, the identification
    sends ``e_a`` to ``sum_b G[a][b] e^b``; requiring the induced pairing to
    evaluate back to ``e_a`` gives the matrix inverse of ``G``.
    """
    if not g.is_nondegenerate():
        raise ValueError("degenerate pairing")
    labels = tuple(dual_labels) if dual_labels is not None else tuple(f"{l}*" for l in g.space.labels)
    dual = SuperSpace(labels, g.space.parities, g.space.hyperbolic)
    return InnerProduct(dual, _invert(g.matrix))


def factorial_fraction(n: int) -> Fraction:
    return Fraction(factorial(n))
