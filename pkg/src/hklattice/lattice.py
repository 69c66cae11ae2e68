"""Exact arithmetic on even integral lattices.

A lattice is a Gram matrix over Z.  Vectors are integer tuples written in
the lattice basis.  Everything here is exact: Python ints and
``fractions.Fraction``, no floating point.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = tuple[tuple[int, ...], ...]
Vector = tuple[int, ...]

# Simple-root Gram matrix of E8, negated.  Nodes 0-6 form the long chain,
# node 7 hangs off node 4 (Bourbaki-style Dynkin diagram).
_E8_EDGES = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)]


def _e8_negative_gram() -> Matrix:
    g = [[0] * 8 for _ in range(8)]
    for i in range(8):
        g[i][i] = -2
    for i, j in _E8_EDGES:
        g[i][j] = g[j][i] = 1
    return tuple(tuple(row) for row in g)


def determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant of a square integer matrix."""
    m = [list(row) for row in matrix]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class IntegerLattice:
    """Even, non-degenerate lattice given by its Gram matrix.

    ``hyperbolic`` lists index pairs ``(i, j)`` of basis vectors spanning
    declared copies of the hyperbolic plane U (``e_i^2 = e_j^2 = 0``,
    ``e_i.e_j = 1``, orthogonal to everything else).  Constructors fill it
    in; it is what Eichler-type operations check before running.
    """

    gram: Matrix
    hyperbolic: tuple[tuple[int, int], ...] = ()
    det: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        gram = tuple(tuple(int(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", gram)
        r = len(gram)
        if r == 0 or any(len(row) != r for row in gram):
            raise ValueError("Gram matrix must be square and non-empty")
        for i in range(r):
            if gram[i][i] % 2:
                raise ValueError(f"lattice is not even: gram[{i}][{i}] = {gram[i][i]}")
            for j in range(i):
                if gram[i][j] != gram[j][i]:
                    raise ValueError("Gram matrix is not symmetric")
        d = determinant(gram)
        if d == 0:
            raise ValueError("Gram matrix is degenerate")
        object.__setattr__(self, "det", d)
        for i, j in self.hyperbolic:
            ok = gram[i][i] == 0 and gram[j][j] == 0 and gram[i][j] == 1
            ok = ok and all(gram[i][k] == 0 and gram[j][k] == 0
                            for k in range(r) if k not in (i, j))
            if not ok:
                raise ValueError(f"basis pair {(i, j)} does not span an orthogonal U summand")

    @property
    def rank(self) -> int:
        return len(self.gram)

    def __str__(self):
        return f"IntegerLattice(rank={self.rank}, det={self.det})"


def standard_lattice(kind: str, k: int | None = None) -> IntegerLattice:
    """Return ``U``, ``E8neg`` (E8(-1)) or ``rank1`` (the lattice <k>)."""
    kind_l = kind.lower()
    if kind_l == "u":
        return IntegerLattice(((0, 1), (1, 0)), hyperbolic=((0, 1),))
    if kind_l in ("e8neg", "e8(-1)"):
        return IntegerLattice(_e8_negative_gram())
    if kind_l == "rank1":
        if k is None or k == 0 or k % 2:
            raise ValueError(f"rank1 lattice needs a nonzero even k, got {k!r}")
        return IntegerLattice(((k,),))
    raise ValueError(f"unknown standard lattice {kind!r}")


def direct_sum(*lattices: IntegerLattice) -> IntegerLattice:
    """Orthogonal direct sum; declared U summands are carried along."""
    if not lattices:
        raise ValueError("direct_sum needs at least one lattice")
    r = sum(L.rank for L in lattices)
    g = [[0] * r for _ in range(r)]
    hyperbolic = []
    off = 0
    for L in lattices:
        for i, row in enumerate(L.gram):
            g[off + i][off:off + L.rank] = row
        hyperbolic.extend((off + i, off + j) for i, j in L.hyperbolic)
        off += L.rank
    return IntegerLattice(tuple(map(tuple, g)), hyperbolic=tuple(hyperbolic))


def _check_vector(L: IntegerLattice, v: Sequence[int]) -> Vector:
    if len(v) != L.rank:
        raise ValueError(f"vector of length {len(v)} in a lattice of rank {L.rank}")
    return tuple(int(x) for x in v)


def _gram_times(L: IntegerLattice, v: Vector) -> list[int]:
    return [sum(gij * vj for gij, vj in zip(row, v) if vj) for row in L.gram]


def evaluate(L: IntegerLattice, v: Sequence[int], w: Sequence[int]) -> int:
    """Bilinear form ``v^T G w``."""
    v = _check_vector(L, v)
    w = _check_vector(L, w)
    return sum(vi * x for vi, x in zip(v, _gram_times(L, w)) if vi)


def square(L: IntegerLattice, v: Sequence[int]) -> int:
    return evaluate(L, v, v)


def divisibility(L: IntegerLattice, v: Sequence[int]) -> int:
    """Positive generator of the ideal ``(v, L)`` in Z."""
    v = _check_vector(L, v)
    if not any(v):
        raise ValueError("divisibility of the zero vector is undefined")
    d = 0
    for x in _gram_times(L, v):
        d = gcd(d, x)
    return d


def is_primitive(L: IntegerLattice, v: Sequence[int]) -> bool:
    v = _check_vector(L, v)
    if not any(v):
        raise ValueError("primitivity of the zero vector is undefined")
    return functools.reduce(gcd, v, 0) == 1


def smith_normal_form(matrix: Sequence[Sequence[int]]):
    """Smith normal form with transforms.

    Returns ``(diag, P, Q)`` where ``P`` and ``Q`` are unimodular integer
    matrices (lists of lists) with ``P @ matrix @ Q`` diagonal, diagonal
    entries ``diag`` non-negative and each dividing the next.
    """
    A = [list(row) for row in matrix]
    m = len(A)
    n = len(A[0]) if m else 0
    P = [[int(i == j) for j in range(m)] for i in range(m)]
    Q = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        P[i], P[j] = P[j], P[i]

    def swap_cols(i, j):
        for M in (A, Q):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):  # row_dst += c * row_src
        for M in (A, P):
            rs, rd = M[src], M[dst]
            for k in range(len(rd)):
                if rs[k]:
                    rd[k] += c * rs[k]

    def add_col(src, dst, c):  # col_dst += c * col_src
        for M in (A, Q):
            for row in M:
                if row[src]:
                    row[dst] += c * row[src]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            piv = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(t, i, -(A[i][t] // piv))
                    dirty = dirty or A[i][t] != 0
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(t, j, -(A[t][j] // piv))
                    dirty = dirty or A[t][j] != 0
            if dirty:
                continue
            bad = next((i for i in range(t + 1, m)
                        if any(A[i][j] % piv for j in range(t + 1, n))), None)
            if bad is None:
                break
            add_row(bad, t, 1)
        if A[t][t] < 0:
            for M in (A, P):
                M[t] = [-x for x in M[t]]
    diag = [A[i][i] for i in range(min(m, n))]
    return diag, P, Q


@dataclass(frozen=True)
class DiscriminantGroup:
    """``A_L = L^v / L`` as a product of cyclic groups.

    ``generator_lifts[i]`` is a rational vector (lattice basis coordinates)
    whose class generates the factor ``Z/invariant_factors[i]``.
    ``form_values[i]`` is its discriminant-form value in ``[0, 2)``.
    """

    invariant_factors: tuple[int, ...]
    generator_lifts: tuple[tuple[Fraction, ...], ...]
    form_values: tuple[Fraction, ...]
    # rows of P picking out the nontrivial factors; maps y = G x to coeffs
    _projection: tuple[tuple[int, ...], ...] = field(repr=False, compare=False, default=())

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def coeffs_of_dual(self, y: Sequence[int]) -> tuple[int, ...]:
        """Class of the dual vector ``G^{-1} y`` (``y`` integral)."""
        return tuple(sum(p * yi for p, yi in zip(row, y)) % d
                     for row, d in zip(self._projection, self.invariant_factors))


def _mod2(x: Fraction) -> Fraction:
    return x - 2 * (x.numerator // (2 * x.denominator))


@dataclass(frozen=True)
class DiscElement:
    """Element of a discriminant group: coefficients and its form value mod 2Z."""

    coeffs: tuple[int, ...]
    q_value: Fraction

    def is_trivial(self) -> bool:
        return not any(self.coeffs)


@functools.lru_cache(maxsize=256)
def discriminant_group(L: IntegerLattice) -> DiscriminantGroup:
    diag, P, Q = smith_normal_form(L.gram)
    keep = [i for i, d in enumerate(diag) if d > 1]
    lifts = []
    values = []
    for i in keep:
        d = diag[i]
        g = tuple(Fraction(Q[r][i], d) for r in range(L.rank))
        lifts.append(g)
        values.append(_mod2(_rational_square(L, g)))
    return DiscriminantGroup(
        invariant_factors=tuple(diag[i] for i in keep),
        generator_lifts=tuple(lifts),
        form_values=tuple(values),
        _projection=tuple(tuple(P[i]) for i in keep),
    )


def _rational_square(L: IntegerLattice, x: Sequence[Fraction]) -> Fraction:
    return sum((xi * gij * xj for row, xi in zip(L.gram, x) if xi
                for gij, xj in zip(row, x) if xj and gij), Fraction(0))


def disc_form_value(L: IntegerLattice, coeffs: Sequence[int]) -> Fraction:
    """Value of the discriminant quadratic form on ``sum coeffs[i] g_i``."""
    A = discriminant_group(L)
    if len(coeffs) != len(A.invariant_factors):
        raise ValueError("coefficient vector does not match the discriminant group")
    lift = [Fraction(0)] * L.rank
    for c, g in zip(coeffs, A.generator_lifts):
        if c:
            lift = [a + c * b for a, b in zip(lift, g)]
    return _mod2(_rational_square(L, lift))


def disc_class(L: IntegerLattice, v: Sequence[int]) -> DiscElement:
    """Class ``[v/div(v)]`` of a primitive vector in ``A_L``."""
    v = _check_vector(L, v)
    if not is_primitive(L, v):
        raise ValueError(f"vector {v} is not primitive")
    y = _gram_times(L, v)
    div = 0
    for x in y:
        div = gcd(div, x)
    A = discriminant_group(L)
    coeffs = A.coeffs_of_dual([x // div for x in y])
    q = _mod2(Fraction(sum(a * b for a, b in zip(v, y)), div * div))
    return DiscElement(coeffs, q)


def element_order(A: DiscriminantGroup, coeffs: Sequence[int]) -> int:
    """Order of an element given by its coefficients."""
    out = 1
    for c, d in zip(coeffs, A.invariant_factors):
        k = d // gcd(c % d, d)
        out = out * k // gcd(out, k)
    return out
