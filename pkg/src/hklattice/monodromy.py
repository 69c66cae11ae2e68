"""Monodromy orbits of primitive classes.

Two primitive vectors of a lattice ``U^2 + L'`` lie in the same orbit of
the stable orthogonal group exactly when they have the same square and the
same class ``[v/div(v)]`` in the discriminant group (Eichler's criterion).
``orbit_oracle`` checks this independently by searching over Eichler
transvections inside a coefficient box.

For K3^[n] and Kummer models every orbit of a pair (manifold, divisor) has
a representative ``t H - (mu/e) B`` with ``mu`` in a short window; see
``mu_normal_form``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from . import lattice as lat
from .models import (
    DivisorClass,
    Family,
    HKModel,
    OrbitInvariant,
    exceptional_order,
    fold_residue,
    model,
)

DEFAULT_COEFF_BOUND = 16


class NoRepresentative(ValueError):
    """No normal form with integral positive ``s`` exists for the invariant."""


def _require_u2(L: lat.IntegerLattice):
    if len(L.hyperbolic) < 2:
        raise ValueError("lattice has no declared U^2 summand; Eichler's criterion does not apply")


def eichler_equivalent(L: lat.IntegerLattice, v, w) -> bool:
    """Same square and same discriminant class (no sign folding)."""
    _require_u2(L)
    for x in (v, w):
        if not lat.is_primitive(L, x):
            raise ValueError(f"vector {tuple(x)} is not primitive")
    if lat.square(L, v) != lat.square(L, w):
        return False
    return lat.disc_class(L, v).coeffs == lat.disc_class(L, w).coeffs


# -- transvection oracle ------------------------------------------------------

def transvection_matrix(L: lat.IntegerLattice, e, a) -> np.ndarray:
    """Matrix of ``x -> x + (x.e) a - (x.a) e - q(a)/2 (x.e) e``.

    ``e`` must be isotropic and orthogonal to ``a``.
    """
    G = np.array(L.gram, dtype=np.int64)
    e = np.asarray(e, dtype=np.int64)
    a = np.asarray(a, dtype=np.int64)
    if e @ G @ e != 0 or e @ G @ a != 0:
        raise ValueError("transvection needs e isotropic and a orthogonal to e")
    half_qa = int(a @ G @ a) // 2
    Ge, Ga = G @ e, G @ a
    return (np.eye(L.rank, dtype=np.int64) + np.outer(a, Ge) - np.outer(e, Ga)
            - half_qa * np.outer(e, Ge))


def eichler_generators(L: lat.IntegerLattice) -> list[np.ndarray]:
    """Transvections with ``e`` a declared hyperbolic basis vector and
    ``a = +-`` a basis vector orthogonal to ``e``."""
    _require_u2(L)
    r = L.rank
    gens = []
    for pair in L.hyperbolic:
        for i in pair:
            e = [0] * r
            e[i] = 1
            for k in range(r):
                if k == i or L.gram[i][k] != 0:
                    continue
                for sign in (1, -1):
                    a = [0] * r
                    a[k] = sign
                    gens.append(transvection_matrix(L, e, a))
    return gens


class _Box:
    """Integer box ``[-bound, bound]^rank`` with dense int64 keys."""

    def __init__(self, rank: int, bound: int):
        self.rank = rank
        self.bound = bound
        self.width = 2 * bound + 1
        self.size = self.width ** rank
        self.radix = self.width ** np.arange(rank - 1, -1, -1, dtype=np.int64)
        if self.size >= 2 ** 62:
            raise ValueError("coefficient box too large to index")

    def inside(self, X: np.ndarray) -> np.ndarray:
        return np.all(np.abs(X) <= self.bound, axis=1)

    def keys(self, X: np.ndarray) -> np.ndarray:
        return (X + self.bound) @ self.radix


class _Visited:
    """Bitmap over the box when affordable, otherwise a hash set."""

    def __init__(self, box: _Box):
        self.dense = box.size <= 2 ** 28
        self.bits = np.zeros(box.size, dtype=bool) if self.dense else None
        self.seen: set[int] = set()

    def add_new(self, keys: np.ndarray) -> np.ndarray:
        """Mark keys visited; return indices of first occurrences of unseen keys."""
        uniq, first = np.unique(keys, return_index=True)
        if self.dense:
            fresh = ~self.bits[uniq]
            self.bits[uniq[fresh]] = True
        else:
            fresh = np.array([k not in self.seen for k in uniq.tolist()], dtype=bool)
            self.seen.update(uniq[fresh].tolist())
        return np.sort(first[fresh])


class _Conservation:
    """Vectorised check that square and discriminant class stay fixed."""

    def __init__(self, L: lat.IntegerLattice, v):
        self.G = np.array(L.gram, dtype=np.int64)
        A = lat.discriminant_group(L)
        self.P = np.array(A._projection, dtype=np.int64).reshape(-1, L.rank)
        self.d = np.array(A.invariant_factors, dtype=np.int64)
        self.q = lat.square(L, v)
        self.cls = np.array(lat.disc_class(L, v).coeffs, dtype=np.int64)

    def check(self, X: np.ndarray):
        Y = X @ self.G
        q = np.einsum("ij,ij->i", X, Y)
        if np.any(q != self.q):
            raise AssertionError("transvection changed the square")
        if len(self.d):
            div = np.gcd.reduce(np.abs(Y), axis=1)
            cls = ((Y // div[:, None]) @ self.P.T) % self.d
            if np.any(cls != self.cls):
                raise AssertionError("transvection changed the discriminant class")


@dataclass(frozen=True)
class OracleResult:
    reached: bool
    depth: int | None
    explored: int

    @property
    def status(self) -> str:
        return "Reached" if self.reached else "NotReachedWithinBound"


def _bfs(L, start, gens, box, visited, conservation):
    """Breadth-first search from ``start``; yields ``(depth, frontier)``."""
    frontier = np.array([start], dtype=np.int64)
    visited.add_new(box.keys(frontier))
    depth = 0
    while len(frontier):
        yield depth, frontier
        images = np.concatenate([frontier @ T.T for T in gens])
        images = images[box.inside(images)]
        if not len(images):
            return
        frontier = images[visited.add_new(box.keys(images))]
        conservation.check(frontier)
        depth += 1


def orbit_oracle(L: lat.IntegerLattice, v, w, coeff_bound: int = DEFAULT_COEFF_BOUND) -> OracleResult:
    """Search for ``w`` in the transvection orbit of ``v`` within a coefficient box."""
    v = tuple(int(x) for x in v)
    w = tuple(int(x) for x in w)
    for x in (v, w):
        if not lat.is_primitive(L, x):
            raise ValueError(f"vector {x} is not primitive")
    if lat.square(L, v) != lat.square(L, w):
        raise ValueError("orbit_oracle needs vectors of equal square")
    if coeff_bound < 1:
        raise ValueError("coeff_bound must be positive")
    box = _Box(L.rank, coeff_bound)
    if not (box.inside(np.array([v])).all() and box.inside(np.array([w])).all()):
        return OracleResult(False, None, 0)
    target = box.keys(np.array([w], dtype=np.int64))[0]
    explored = 0
    for depth, frontier in _bfs(L, v, eichler_generators(L), box, _Visited(box), _Conservation(L, v)):
        explored += len(frontier)
        if np.any(box.keys(frontier) == target):
            return OracleResult(True, depth, explored)
    return OracleResult(False, None, explored)


def orbit_components(L: lat.IntegerLattice, vectors, coeff_bound: int = DEFAULT_COEFF_BOUND) -> list[int]:
    """Label each vector by its connected component of the transvection graph
    restricted to the box.

    The generator set is closed under inverses, so ``orbit_oracle(v, w)``
    reaches ``w`` exactly when the labels of ``v`` and ``w`` agree.
    """
    box = _Box(L.rank, coeff_bound)
    if box.size > 2 ** 31:
        raise ValueError("orbit_components needs the box to fit a dense label array")
    gens = eichler_generators(L)
    labels = np.full(box.size, -1, dtype=np.int32)
    vecs = np.array(vectors, dtype=np.int64)
    if not box.inside(vecs).all():
        raise ValueError("all vectors must lie in the coefficient box")
    keys = box.keys(vecs)
    # components are disjoint and explored whole, so one visited set serves all
    visited = _Visited(box)
    next_label = 0
    for vec, key in zip(vecs, keys):
        if labels[key] >= 0:
            continue
        for _, frontier in _bfs(L, tuple(vec.tolist()), gens, box, visited, _Conservation(L, vec)):
            labels[box.keys(frontier)] = next_label
        next_label += 1
    return labels[keys].tolist()


# -- realizability and normal forms -------------------------------------------

def realizable(family: Family | str, n: int, square: int, t: int, residue: int) -> bool:
    """Whether ``(square, t, residue)`` is the invariant of some primitive divisor."""
    M = exceptional_order(family, n)
    if t < 1 or M % t:
        return False
    r = residue % M
    if M // gcd(r, M) != t:
        return False
    # square / t^2 must equal q(r [B/M]) = -r^2/M modulo 2
    return (square * M + r * r * t * t) % (2 * M * t * t) == 0


@dataclass(frozen=True)
class NormalForm:
    family: Family
    n: int
    s: int
    t: int
    mu: int

    @property
    def e(self) -> int:
        return gcd(exceptional_order(self.family, self.n), self.mu)

    @property
    def model(self) -> HKModel:
        return model(self.family, self.n, self.s)

    @property
    def divisor(self) -> DivisorClass:
        return DivisorClass(self.t, -(self.mu // self.e))

    def to_json(self) -> dict:
        return {"family": self.family.value, "n": self.n, "s": self.s, "t": self.t, "mu": self.mu}


def canonical_mu(family: Family | str, n: int, residue: int) -> int:
    """``mu = M + residue``: ``M`` for the trivial residue, otherwise the
    unique value in ``[M + 1, 3M/2]`` congruent to ``+-residue``."""
    M = exceptional_order(family, n)
    r = fold_residue(residue, M)
    return M + r


def mu_normal_form(family: Family | str, n: int, inv: OrbitInvariant) -> NormalForm:
    family = Family.parse(family)
    M = exceptional_order(family, n)
    if not realizable(family, n, inv.square, inv.divisibility, inv.residue):
        raise NoRepresentative(f"invariant {inv.key()} is not realizable for {family.value}, n={n}")
    if inv.square <= 0:
        raise ValueError("mu_normal_form handles positive squares; use the square-zero certifier")
    mu = canonical_mu(family, n, inv.residue)
    e = gcd(M, mu)
    t = M // e
    if t != inv.divisibility:
        raise NoRepresentative(f"mu={mu} gives divisibility {t}, expected {inv.divisibility}")
    # t^2 * 2s - (mu/e)^2 * M = square
    num = inv.square + (mu // e) ** 2 * M
    if num % (2 * t * t) or num <= 0:
        raise NoRepresentative(
            f"2s * {t}^2 = {inv.square} + {(mu // e) ** 2 * M} has no positive integral solution s")
    return NormalForm(family, n, num // (2 * t * t), t, mu)
