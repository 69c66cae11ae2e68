"""Severi-variety existence tests and rational-curve witnesses.

For a curve ``C`` in ``|H|`` of arithmetic genus ``p`` with ``delta``
nodes, a pencil of degree ``k`` on its normalization sweeps out a rational
curve on the Hilbert scheme (``k = n``) or on the generalized Kummer
(``k = n + 1``).  This module evaluates when such nodal curves exist, the
dimensions of the resulting families, and the class of the rational curve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .models import CurveClass, Family, HKModel, exceptional_order, model, q_curve

log = logging.getLogger(__name__)

ASSERTED_BY_THEOREM = "asserted-by-theorem"


@dataclass(frozen=True)
class SeveriQuery:
    family: Family
    p: int
    delta: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.p < 2:
            raise ValueError(f"arithmetic genus p must be >= 2, got {self.p}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        top = self.p if self.family is Family.K3HILB else self.p - 2
        if not 0 <= self.delta <= top:
            raise ValueError(f"delta = {self.delta} outside [0, {top}] for {self.family.value}")

    @property
    def g(self) -> int:
        """Geometric genus of the normalization."""
        return self.p - self.delta


def alpha(qry: SeveriQuery) -> int:
    M = exceptional_order(qry.family, qry.n)
    if qry.family is Family.K3HILB:
        return qry.g // M
    return (qry.g - 1) // M


def severi_bound(qry: SeveriQuery) -> int:
    """Right-hand side of the existence inequality ``delta >= bound``."""
    a = alpha(qry)
    if qry.family is Family.K3HILB:
        return a * (qry.g - (qry.n - 1) * (a + 1))
    return a * (qry.g - 1 - (qry.n + 1) * (a + 1))


def severi_exists(qry: SeveriQuery) -> bool:
    return qry.delta >= severi_bound(qry)


def brill_noether_number(g: int, r: int, d: int) -> int:
    return g - (r + 1) * (g - d + r)


def severi_dims(qry: SeveriQuery) -> tuple[int, int]:
    """``(dimension of the Severi locus, dimension of the pencils on a general member)``.

    Their sum is the dimension of the swept family of rational curves,
    ``2n - 2`` for K3^[n] and ``2n`` for Kummers.
    """
    if not severi_exists(qry):
        raise ValueError(f"Severi locus is empty for {qry}")
    g, n = qry.g, qry.n
    if qry.family is Family.K3HILB:
        dims = (min(2 * n - 2, g), max(0, 2 * n - 2 - g))
        total = 2 * n - 2
    else:
        dims = (min(g, 2 * n), max(0, brill_noether_number(g, 1, n + 1)))
        total = 2 * n
    assert sum(dims) == total, (qry, dims)
    return dims


def curve_class_of_severi(qry: SeveriQuery, m: HKModel) -> CurveClass:
    """Class ``H - (p - delta + n - 1) tau`` (Kummer: ``H - (p - delta + n) eta``)."""
    if m.family is not qry.family:
        raise ValueError(f"family mismatch: model {m.family.value}, query {qry.family.value}")
    if m.n != qry.n:
        raise ValueError(f"n mismatch: model {m.n}, query {qry.n}")
    if m.genus != qry.p:
        raise ValueError(f"genus mismatch: model has p = s + 1 = {m.genus}, query p = {qry.p}")
    shift = qry.n - 1 if qry.family is Family.K3HILB else qry.n
    return CurveClass(1, qry.g + shift)


@dataclass(frozen=True)
class Witness:
    family: Family
    n: int
    p: int
    delta: int
    g: int
    alpha: int
    severi_dim: int
    series_dim: int
    rho: int
    base_point_free: str = ASSERTED_BY_THEOREM
    nodes_non_neutral: str = ASSERTED_BY_THEOREM

    @property
    def query(self) -> SeveriQuery:
        return SeveriQuery(self.family, self.p, self.delta, self.n)

    def to_json(self) -> dict:
        return {
            "p": self.p, "delta": self.delta, "g": self.g, "alpha": self.alpha,
            "severi_dim": self.severi_dim, "series_dim": self.series_dim, "rho": self.rho,
            "base_point_free": self.base_point_free,
            "nodes_non_neutral": self.nodes_non_neutral,
        }


def witness_genus(family: Family | str, n: int, mu: int) -> int:
    """Geometric genus forced by the target class ``H - mu tau``."""
    family = Family.parse(family)
    return mu - (n - 1) if family is Family.K3HILB else mu - n


def witness(family: Family | str, n: int, s: int, mu: int) -> Witness | None:
    """Severi data producing a rational curve of class ``H - mu tau``.

    Only the node count ``delta = p - g`` forced by the class is tried.
    Returns None when that count is out of range or the existence
    inequality fails.
    """
    family = Family.parse(family)
    m = model(family, n, s)
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    if q_curve(m, CurveClass(1, mu)) < 0:
        raise ValueError(f"q(H - {mu}tau) < 0 on {m}: no witness is claimed for negative classes")
    g = witness_genus(family, n, mu)
    p = m.genus
    delta = p - g
    top = p if family is Family.K3HILB else p - 2
    if g < 0 or not 0 <= delta <= top:
        log.debug("no witness for mu=%d on %s: delta=%d outside [0, %d]", mu, m, delta, top)
        return None
    qry = SeveriQuery(family, p, delta, n)
    if not severi_exists(qry):
        log.debug("no witness for mu=%d on %s: %d < %d", mu, m, delta, severi_bound(qry))
        return None
    k = n if family is Family.K3HILB else n + 1
    sev, ser = severi_dims(qry)
    return Witness(family, n, p, delta, g, alpha(qry), sev, ser, brill_noether_number(g, 1, k))
