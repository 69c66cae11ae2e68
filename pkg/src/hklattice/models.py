"""Beauville-Bogomolov lattice models for S^[n] and K_n(S).

A model is fixed by the family, ``n`` and the degree ``2s`` of the
polarization ``H`` on a Picard-rank-one surface.  Divisor classes are
``a H + b B`` (``B`` is the exceptional half-divisor, called ``e`` for
Kummers); curve classes are ``a H - mu tau`` (``tau`` resp. ``eta`` is the
class of an exceptional fibre curve).

Constants used throughout, with ``M`` the order of the exceptional
summand's discriminant group (``2n-2`` for K3^[n], ``2n+2`` for Kummers)::

    q(B) = -M,   B.tau = -1,   q(tau) = -1/M,   phi(B) = M tau.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from . import lattice as lat


class Family(str, enum.Enum):
    K3HILB = "k3hilb"
    KUMMER = "kummer"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, Family):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown family {value!r}; expected 'k3hilb' or 'kummer'") from None


def exceptional_order(family: Family | str, n: int) -> int:
    """``2n-2`` for K3^[n]-type, ``2n+2`` for generalized Kummers."""
    family = Family.parse(family)
    return 2 * n - 2 if family is Family.K3HILB else 2 * n + 2


@functools.lru_cache(maxsize=128)
def ambient_lattice(family: Family | str, n: int) -> lat.IntegerLattice:
    """Full second-cohomology lattice, exceptional generator last.

    K3^[n]: ``U^3 + E8(-1)^2 + <-(2n-2)>`` (rank 23).
    Kummer: ``U^3 + <-(2n+2)>`` (rank 7).
    """
    family = Family.parse(family)
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    U = lat.standard_lattice("U")
    exc = lat.standard_lattice("rank1", -exceptional_order(family, n))
    if family is Family.K3HILB:
        E8 = lat.standard_lattice("E8neg")
        return lat.direct_sum(U, U, U, E8, E8, exc)
    return lat.direct_sum(U, U, U, exc)


@dataclass(frozen=True)
class HKModel:
    family: Family
    n: int
    s: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")

    @property
    def order(self) -> int:
        return exceptional_order(self.family, self.n)

    @property
    def genus(self) -> int:
        """Arithmetic genus ``p = s + 1`` of curves in ``|H|``."""
        return self.s + 1

    @property
    def ambient(self) -> lat.IntegerLattice:
        return ambient_lattice(self.family, self.n)

    def to_json(self) -> dict:
        return {"family": self.family.value, "n": self.n, "s": self.s}

    @classmethod
    def from_json(cls, data: dict) -> "HKModel":
        return cls(Family.parse(_field(data, "family")), _int_field(data, "n"), _int_field(data, "s"))


def model(family: Family | str, n: int, s: int) -> HKModel:
    return HKModel(Family.parse(family), n, s)


@dataclass(frozen=True)
class DivisorClass:
    """``a H + b B``."""

    a: int
    b: int

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ValueError("divisor class must be nonzero")

    @property
    def content(self) -> int:
        return gcd(self.a, self.b)

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b}

    @classmethod
    def from_json(cls, data: dict) -> "DivisorClass":
        return cls(_int_field(data, "a"), _int_field(data, "b"))

    def __str__(self):
        return _linear_str(self.a, "H", self.b, "B")


@dataclass(frozen=True)
class CurveClass:
    """``a H - mu tau`` (``tau`` read as ``eta`` on Kummer models)."""

    a: int
    mu: int

    def __post_init__(self):
        if self.a == 0 and self.mu == 0:
            raise ValueError("curve class must be nonzero")

    @property
    def content(self) -> int:
        return gcd(self.a, self.mu)

    def to_json(self) -> dict:
        return {"a": self.a, "mu": self.mu}

    @classmethod
    def from_json(cls, data: dict) -> "CurveClass":
        return cls(_int_field(data, "a"), _int_field(data, "mu"))

    def label(self, family: Family | str = Family.K3HILB) -> str:
        sym = "τ" if Family.parse(family) is Family.K3HILB else "η"
        return _linear_str(self.a, "H", -self.mu, sym)

    def __str__(self):
        return self.label()


def _linear_str(a: int, x: str, b: int, y: str) -> str:
    parts = []
    for c, sym in ((a, x), (b, y)):
        if c == 0:
            continue
        mag = "" if abs(c) == 1 else str(abs(c))
        sign = "-" if c < 0 else ("+" if parts else "")
        parts.append(f"{sign}{mag}{sym}")
    return "".join(parts)


def _field(data: dict, key: str):
    if not isinstance(data, dict):
        raise ValueError(f"expected a JSON object, got {data!r}")
    if key not in data:
        raise ValueError(f"missing field {key!r}")
    return data[key]


def _int_field(data: dict, key: str) -> int:
    value = _field(data, key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"field {key!r} must be an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class OrbitInvariant:
    """Square, divisibility and sign-folded residue of a primitive divisor.

    ``residue`` is ``c`` with ``[D/div(D)] = c [B/M]``, folded to
    ``min(c, M - c)``.
    """

    square: int
    divisibility: int
    residue: int

    def to_json(self) -> dict:
        return {"square": self.square, "divisibility": self.divisibility, "residue": self.residue}

    @classmethod
    def from_json(cls, data: dict) -> "OrbitInvariant":
        return cls(_int_field(data, "square"), _int_field(data, "divisibility"),
                   _int_field(data, "residue"))

    def key(self) -> tuple[int, int, int]:
        return (self.square, self.divisibility, self.residue)


def fold_residue(c: int, order: int) -> int:
    c %= order
    return min(c, order - c)


def q_divisor(m: HKModel, D: DivisorClass) -> int:
    return D.a * D.a * 2 * m.s - D.b * D.b * m.order


def q_curve(m: HKModel, C: CurveClass) -> Fraction:
    return C.a * C.a * 2 * m.s - Fraction(C.mu * C.mu, m.order)


def phi(m: HKModel, D: DivisorClass) -> CurveClass:
    """Image of ``D`` under the duality embedding ``H^2 -> H_2``.

    ``H`` maps to ``H`` and ``B`` maps to ``M tau``, so the image is
    integral and ``q(phi(D)) == q(D)``.
    """
    return CurveClass(D.a, -D.b * m.order)


def dual_divisor(m: HKModel, C: CurveClass) -> tuple[DivisorClass, int]:
    """Primitive divisor ``D`` with ``phi(D) = t C`` for ``C = H - mu tau``.

    ``D = t H - (mu/e) B`` with ``e = gcd(M, mu)`` and ``t = M/e``.
    """
    if C.a != 1:
        raise ValueError(f"dual_divisor expects a curve class H - mu*tau, got a = {C.a}")
    if C.mu < 0:
        raise ValueError(f"dual_divisor expects mu >= 0, got {C.mu}")
    return divisor_dual_to(m, C)


def divisor_dual_to(m: HKModel, C: CurveClass) -> tuple[DivisorClass, int]:
    """Primitive divisor proportional to ``C`` under ``phi``, for any ``C``.

    Returns ``(D, t)`` with ``phi(D) = t C``.  For a primitive ``C``,
    ``t = M / gcd(M, mu)``.
    """
    M = m.order
    e = gcd(M, C.mu)
    a, b = C.a * (M // e), -(C.mu // e)
    c = gcd(a, b)
    D = DivisorClass(a // c, b // c)
    t = Fraction(M, e * c)
    if t.denominator != 1:
        raise ValueError(f"{C} has no integral primitive dual divisor")  # pragma: no cover
    return D, int(t)


def embed_divisor(m: HKModel, D: DivisorClass) -> tuple[int, ...]:
    """Coordinates of ``D`` in the ambient lattice.

    ``H = e1 + s f1`` inside the first U summand, ``B`` the last basis vector.
    """
    v = [0] * m.ambient.rank
    v[0] = D.a
    v[1] = D.a * m.s
    v[-1] = D.b
    return tuple(v)


def reflect_exceptional(D: DivisorClass) -> DivisorClass:
    """Reflection along ``B``: ``a H + b B -> a H - b B``."""
    return DivisorClass(D.a, -D.b)


@functools.lru_cache(maxsize=128)
def _exceptional_generator(family: Family, n: int) -> tuple[int, ...]:
    L = ambient_lattice(family, n)
    B = [0] * L.rank
    B[-1] = 1
    return lat.disc_class(L, B).coeffs


def residue_coefficient(m: HKModel, D: DivisorClass) -> int:
    """Unfolded ``c`` in ``[D/div(D)] = c [B/M]``, ``0 <= c < M``."""
    L = m.ambient
    cls_D = lat.disc_class(L, embed_divisor(m, D)).coeffs
    (gen,) = _exceptional_generator(m.family, m.n)
    (x,) = cls_D
    return x * pow(gen, -1, m.order) % m.order


def divisor_invariants(m: HKModel, D: DivisorClass) -> OrbitInvariant:
    if D.content != 1:
        raise ValueError(f"divisor {D} is not primitive")
    v = embed_divisor(m, D)
    div = lat.divisibility(m.ambient, v)
    return OrbitInvariant(q_divisor(m, D), div, fold_residue(residue_coefficient(m, D), m.order))


def degree(m: HKModel, D: DivisorClass, C: CurveClass) -> int:
    """Intersection number ``D . C`` using ``H.H = 2s``, ``B.tau = -1``."""
    return D.a * C.a * 2 * m.s + D.b * C.mu
