"""Lattice-level certificates that a curve class's orbit contains a rational curve.

A certificate walks the chain

    curve class -> dual divisor -> orbit invariant -> normal form
                -> Severi witness for the normal form's dual curve

and records every check with its exact inputs and values.  Certificates
are plain JSON; ``verify_certificate`` recomputes one from its input and
compares the serialized forms byte for byte.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .brill_noether import (
    Witness,
    curve_class_of_severi,
    severi_bound,
    severi_dims,
    witness,
)
from .models import (
    CurveClass,
    Family,
    HKModel,
    OrbitInvariant,
    degree,
    divisor_dual_to,
    divisor_invariants,
    embed_divisor,
    exceptional_order,
    model,
    phi,
    q_curve,
    q_divisor,
    reflect_exceptional,
)
from .monodromy import (
    NoRepresentative,
    NormalForm,
    canonical_mu,
    eichler_equivalent,
    mu_normal_form,
    realizable,
)

log = logging.getLogger(__name__)

SCHEMA = "hklattice.certificate/1"

UNREALIZABLE = "UNREALIZABLE"
NO_INTEGRAL_S = "NO_INTEGRAL_S"
WITNESS_MISSING = "WITNESS_MISSING"
EICHLER_MISMATCH = "EICHLER_MISMATCH"
CHECK_FAILED = "CHECK_FAILED"

# flags marking places where the construction leaves the literal ranges
FLAG_TRIVIAL_RESIDUE = "trivial-residue-mu-equals-M"
FLAG_ZERO_ENDPOINT = "square-zero-b-at-lower-endpoint"
FLAG_KUMMER_ZERO = "kummer-square-zero-by-analogy"


def exact(x):
    """JSON-safe exact value: Fractions become ``"num/den"`` strings."""
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {k: exact(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [exact(v) for v in x]
    return x


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class Check:
    name: str
    inputs: dict
    expected: object
    actual: object
    passed: bool

    def to_json(self) -> dict:
        return {"name": self.name, "inputs": exact(self.inputs), "expected": exact(self.expected),
                "actual": exact(self.actual), "pass": bool(self.passed)}


class CertificationFailure(Exception):
    """Structured failure report; ``reason`` is one of the reason codes."""

    def __init__(self, reason: str, message: str, details: dict | None = None,
                 checks: list[Check] | None = None):
        super().__init__(f"{reason}: {message}")
        self.reason = reason
        self.message = message
        self.details = details or {}
        self.checks = checks or []

    def to_json(self) -> dict:
        out = {"reason": self.reason, "message": self.message, "details": exact(self.details)}
        if self.checks:
            out["checks"] = [c.to_json() for c in self.checks]
        return out


@dataclass(frozen=True)
class Certificate:
    kind: str
    model: HKModel
    curve: CurveClass
    dual_divisor: object
    dual_factor: int
    invariant: OrbitInvariant
    normal_form: NormalForm
    witness: Witness
    checks: tuple[Check, ...]
    flags: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": self.kind,
            "input": {"model": self.model.to_json(), "curve": self.curve.to_json()},
            "dual_divisor": {**self.dual_divisor.to_json(), "t": self.dual_factor},
            "invariant": self.invariant.to_json(),
            "normal_form": self.normal_form.to_json(),
            "witness": self.witness.to_json(),
            "checks": [c.to_json() for c in self.checks],
            "flags": list(self.flags),
        }


def _check_input(m: HKModel, C: CurveClass):
    if C.content != 1:
        raise ValueError(f"curve class {C.label(m.family)} is not primitive")
    q = q_curve(m, C)
    if q < 0:
        raise ValueError(f"q({C.label(m.family)}) = {q} < 0: negative classes are not certified")
    return q


def certify(m: HKModel, C: CurveClass) -> Certificate:
    """Dispatch on the sign of ``q(C)``."""
    q = _check_input(m, C)
    return certify_positive(m, C) if q > 0 else certify_zero(m, C)


def certify_positive(m: HKModel, C: CurveClass) -> Certificate:
    q = _check_input(m, C)
    if q == 0:
        raise ValueError("q(C) = 0: use certify_zero")
    D, t_in = divisor_dual_to(m, C)
    inv = divisor_invariants(m, D)
    if not realizable(m.family, m.n, *inv.key()):
        raise CertificationFailure(UNREALIZABLE, f"invariant {inv.key()} violates the discriminant congruence",
                                   {"invariant": inv.to_json()})
    try:
        nf = mu_normal_form(m.family, m.n, inv)
    except NoRepresentative as exc:
        raise CertificationFailure(NO_INTEGRAL_S, str(exc), {"invariant": inv.to_json()}) from None
    return _assemble("positive", m, C, D, t_in, inv, nf)


def square_zero_normal_form(family, n: int, inv: OrbitInvariant) -> NormalForm:
    """Representative ``H - b tau`` with ``q = 0``: ``b = M + residue``, ``s = b^2 / 2M``."""
    b = canonical_mu(family, n, inv.residue)
    return square_zero_candidate(family, n, b, expected_t=inv.divisibility)


def square_zero_candidate(family, n: int, b: int, expected_t: int | None = None) -> NormalForm:
    """Normal form for the square-zero class ``H - b tau``, if ``2s M = b^2`` is solvable."""
    family = Family.parse(family)
    M = exceptional_order(family, n)
    if (b * b) % (2 * M):
        raise CertificationFailure(
            NO_INTEGRAL_S, f"2s*{M} = {b}^2 = {b * b} has no integral solution s",
            {"family": family.value, "n": n, "b": b, "lhs_factor": 2 * M, "b_squared": b * b})
    t = M // gcd(M, b)
    if expected_t is not None and t != expected_t:
        raise CertificationFailure(NO_INTEGRAL_S, f"b = {b} gives divisibility {t}, expected {expected_t}",
                                   {"family": family.value, "n": n, "b": b})
    return NormalForm(family, n, b * b // (2 * M), t, b)


def certify_zero(m: HKModel, C: CurveClass) -> Certificate:
    q = _check_input(m, C)
    if q != 0:
        raise ValueError(f"certify_zero needs q(C) = 0, got {q}")
    D, t_in = divisor_dual_to(m, C)
    inv = divisor_invariants(m, D)
    if not realizable(m.family, m.n, *inv.key()):
        raise CertificationFailure(UNREALIZABLE, f"invariant {inv.key()} violates the discriminant congruence",
                                   {"invariant": inv.to_json()})
    nf = square_zero_normal_form(m.family, m.n, inv)
    return _assemble("zero", m, C, D, t_in, inv, nf)


def _assemble(kind, m, C, D, t_in, inv, nf: NormalForm) -> Certificate:
    family, n, M = m.family, m.n, m.order
    w = witness(family, n, nf.s, nf.mu)
    if w is None:
        raise CertificationFailure(WITNESS_MISSING, f"no Severi witness for H-{nf.mu}tau on s={nf.s}",
                                   {"normal_form": nf.to_json()})
    checks = _checks(m, C, D, t_in, inv, nf, w, kind)
    failed = [c for c in checks if not c.passed]
    if failed:
        reason = EICHLER_MISMATCH if any(c.name == "eichler_equivalence" for c in failed) else CHECK_FAILED
        raise CertificationFailure(reason, "failed checks: " + ", ".join(c.name for c in failed),
                                   {"normal_form": nf.to_json()}, checks)
    flags = []
    if nf.mu == M:
        flags.append(FLAG_TRIVIAL_RESIDUE)
    if kind == "zero":
        if nf.mu == M:
            flags.append(FLAG_ZERO_ENDPOINT)
        if family is Family.KUMMER:
            flags.append(FLAG_KUMMER_ZERO)
    return Certificate(kind, m, C, D, t_in, inv, nf, w, tuple(checks), tuple(flags))


def _checks(m, C, D, t_in, inv, nf, w, kind) -> list[Check]:
    family, n, M = m.family, m.n, m.order
    nf_model = nf.model
    nf_div = nf.divisor
    target = CurveClass(1, nf.mu)
    q_in = q_curve(m, C)
    out = []

    def add(name, inputs, expected, actual, passed=None):
        out.append(Check(name, inputs, expected, actual, expected == actual if passed is None else passed))

    add("input_primitive", {"curve": C.to_json()}, 1, C.content)
    if kind == "positive":
        add("input_square_positive", {"curve": C.to_json()}, "positive", q_in, q_in > 0)
    else:
        add("input_square_zero", {"curve": C.to_json()}, 0, q_in)
    add("dual_divisor", {"divisor": D.to_json(), "t": t_in},
        CurveClass(t_in * C.a, t_in * C.mu).to_json(), phi(m, D).to_json())
    nf_inv = divisor_invariants(nf_model, nf_div)
    add("square_match", {"normal_form_divisor": nf_div.to_json(), "s": nf.s},
        inv.square, q_divisor(nf_model, nf_div))
    add("divisibility_match", {"normal_form_divisor": nf_div.to_json()}, inv.divisibility, nf_inv.divisibility)
    add("residue_match", {"normal_form_divisor": nf_div.to_json()}, inv.residue, nf_inv.residue)
    add("mu_window", {"M": M}, [M, M + M // 2], nf.mu, M <= nf.mu <= M + M // 2)

    # the sign fold is realized by reflecting along B; record which side matched
    L = m.ambient
    v_in = embed_divisor(m, D)
    v_nf = embed_divisor(nf_model, nf_div)
    direct = eichler_equivalent(L, v_in, v_nf)
    v_match = v_nf if direct else embed_divisor(nf_model, reflect_exceptional(nf_div))
    add("eichler_equivalence",
        {"input_vector": list(v_in), "normal_form_vector": list(v_match), "reflected": not direct},
        True, direct or eichler_equivalent(L, v_in, v_match))

    add("normal_form_dual_curve", {"normal_form_divisor": nf_div.to_json()},
        CurveClass(nf.t, nf.t * nf.mu).to_json(), phi(nf_model, nf_div).to_json())
    add("witness_curve_class", {"p": w.p, "delta": w.delta, "n": n},
        target.to_json(), curve_class_of_severi(w.query, nf_model).to_json())
    bound = severi_bound(w.query)
    add("severi_inequality", {"p": w.p, "delta": w.delta, "n": n, "alpha": w.alpha},
        {"delta_at_least": bound}, {"delta": w.delta}, w.delta >= bound)
    dims = severi_dims(w.query)
    total = 2 * n - 2 if family is Family.K3HILB else 2 * n
    add("family_dimension", {"severi_dim": dims[0], "series_dim": dims[1]}, total, sum(dims))
    add("witness_degree", {"divisor": nf_div.to_json(), "curve": target.to_json()},
        Fraction(inv.square, nf.t), Fraction(degree(nf_model, nf_div, target)))
    return out


def verify_certificate(data: dict) -> tuple[bool, dict]:
    """Recompute a certificate from its recorded input.

    Returns ``(identical, recomputed_json)``; ``identical`` means the
    canonical serializations agree byte for byte.
    """
    m = HKModel.from_json(data["input"]["model"])
    C = CurveClass.from_json(data["input"]["curve"])
    fresh = certify(m, C).to_json()
    return canonical_json(fresh) == canonical_json(data), fresh


# -- sweeps ---------------------------------------------------------------------

def enumerate_invariants(family, n: int, square_bound: int, include_zero: bool = True):
    """Realizable ``(square, t, residue)`` with ``0 <= square <= bound``, lexicographic."""
    M = exceptional_order(family, n)
    divisors = [t for t in range(1, M + 1) if M % t == 0]
    lo = 0 if include_zero else 2
    out = []
    for sq in range(lo, square_bound + 1, 2):
        for t in divisors:
            for r in range(M // 2 + 1):
                if realizable(family, n, sq, t, r):
                    out.append(OrbitInvariant(sq, t, r))
    return out


def representative_input(family, n: int, inv: OrbitInvariant) -> tuple[HKModel, CurveClass]:
    """A class with invariant ``inv`` that is not the normal form itself.

    Uses ``H - (3M - mu) tau`` where ``mu`` is the normal-form value; this
    has the opposite residue sign, so certifying it exercises the fold.
    """
    M = exceptional_order(family, n)
    mu = 3 * M - canonical_mu(family, n, inv.residue)
    t = inv.divisibility
    num = Fraction(inv.square, t * t) + Fraction(mu * mu, M)
    s = num / 2
    if s.denominator != 1 or s < 1:
        raise CertificationFailure(NO_INTEGRAL_S, f"no integral model for representative of {inv.key()}",
                                   {"invariant": inv.to_json(), "mu": mu})
    return model(family, n, int(s)), CurveClass(1, mu)


@dataclass
class CoverageReport:
    family: Family
    n: int
    square_bound: int
    orbits_total: int = 0
    orbits_certified: int = 0
    positive_total: int = 0
    zero_total: int = 0
    failures: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)

    def to_json(self, include_certificates: bool = False) -> dict:
        out = {
            "schema": "hklattice.coverage/1",
            "family": self.family.value, "n": self.n, "square_bound": self.square_bound,
            "orbits_total": self.orbits_total, "orbits_certified": self.orbits_certified,
            "positive_total": self.positive_total, "zero_total": self.zero_total,
            "failures": self.failures, "flags": dict(sorted(self.flags.items())),
        }
        if include_certificates:
            out["certificates"] = self.certificates
        return out


def coverage(family, n: int, square_bound: int) -> CoverageReport:
    family = Family.parse(family)
    if n < 2 or square_bound <= 0:
        raise ValueError("coverage needs n >= 2 and a positive square bound")
    report = CoverageReport(family, n, square_bound)
    for inv in enumerate_invariants(family, n, square_bound):
        report.orbits_total += 1
        if inv.square > 0:
            report.positive_total += 1
        else:
            report.zero_total += 1
        try:
            m, C = representative_input(family, n, inv)
            cert = certify(m, C)
        except CertificationFailure as exc:
            report.failures.append({"invariant": inv.to_json(), **exc.to_json()})
            continue
        report.orbits_certified += 1
        report.certificates.append(cert.to_json())
        for f in cert.flags:
            report.flags[f] = report.flags.get(f, 0) + 1
    assert report.orbits_total == report.orbits_certified + len(report.failures)
    return report


def square_zero_sweep(family, n: int) -> CoverageReport:
    """Certify ``H - b tau`` for every ``b`` in the square-zero window.

    The window is ``[M, 3M/2]``, i.e. ``[2(n-1), 3(n-1)]`` for K3^[n].
    Values of ``b`` with ``b^2`` not divisible by ``2M`` land in
    ``failures`` with reason ``NO_INTEGRAL_S``.
    """
    family = Family.parse(family)
    M = exceptional_order(family, n)
    report = CoverageReport(family, n, 0)
    for b in range(M, M + M // 2 + 1):
        report.orbits_total += 1
        report.zero_total += 1
        try:
            nf = square_zero_candidate(family, n, b)
            cert = certify_zero(nf.model, CurveClass(1, b))
        except CertificationFailure as exc:
            report.failures.append({"b": b, **exc.to_json()})
            continue
        report.orbits_certified += 1
        report.certificates.append(cert.to_json())
        for f in cert.flags:
            report.flags[f] = report.flags.get(f, 0) + 1
    return report

