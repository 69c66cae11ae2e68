import json
from math import gcd

import pytest

from hklattice.certifier import (
    NO_INTEGRAL_S,
    CertificationFailure,
    canonical_json,
    certify,
    certify_positive,
    certify_zero,
    coverage,
    enumerate_invariants,
    representative_input,
    square_zero_candidate,
    square_zero_sweep,
    verify_certificate,
)
from hklattice.models import CurveClass, divisor_invariants, model, q_curve
from hklattice.monodromy import realizable

CHECK_KEYS = {"name", "inputs", "expected", "actual", "pass"}


def test_fano_certificate():
    cert = certify_positive(model("k3hilb", 2, 7), CurveClass(1, 5))
    assert cert.invariant.key() == (6, 2, 1)
    nf = cert.normal_form
    assert (nf.s, nf.t, nf.mu) == (3, 2, 3)
    w = cert.witness
    assert (w.p, w.delta, w.g, w.alpha) == (4, 2, 2, 1)
    checks = {c.name: c for c in cert.checks}
    assert checks["severi_inequality"].expected == {"delta_at_least": 0}
    assert checks["witness_degree"].actual == 3  # (2H - 3B).(H - 3 tau) = 2*6 - 9
    assert cert.valid


def test_trivial_residue_certificate():
    for n in (2, 3, 5):
        cert = certify(model("k3hilb", n, 4), CurveClass(1, 0))
        assert cert.invariant.key() == (8, 1, 0)
        assert cert.normal_form.mu == 2 * n - 2
        assert "trivial-residue-mu-equals-M" in cert.flags


def test_negative_classes_are_refused():
    m = model("kummer", 2, 2)
    assert q_curve(m, CurveClass(1, 7)) < 0
    for fn in (certify, certify_positive, certify_zero):
        with pytest.raises(ValueError, match="negative"):
            fn(m, CurveClass(1, 7))


def test_non_primitive_refused():
    with pytest.raises(ValueError, match="primitive"):
        certify(model("k3hilb", 2, 7), CurveClass(2, 4))


def test_square_zero_examples():
    cert = certify_zero(model("k3hilb", 2, 1), CurveClass(1, 2))
    nf, w = cert.normal_form, cert.witness
    assert (nf.mu, nf.s) == (2, 1)
    assert (w.p, w.delta, w.g) == (2, 1, 1)
    assert "square-zero-b-at-lower-endpoint" in cert.flags

    cert = certify_zero(model("k3hilb", 3, 2), CurveClass(1, 4))
    assert (cert.witness.p, cert.witness.delta, cert.witness.g, cert.witness.alpha) == (3, 1, 2, 0)

    with pytest.raises(CertificationFailure) as exc:
        square_zero_candidate("k3hilb", 2, 3)
    assert exc.value.reason == NO_INTEGRAL_S


def test_certify_zero_needs_zero_square():
    with pytest.raises(ValueError):
        certify_zero(model("k3hilb", 2, 7), CurveClass(1, 5))
    with pytest.raises(ValueError):
        certify_positive(model("k3hilb", 2, 1), CurveClass(1, 2))


def test_non_unit_leading_coefficient():
    m = model("k3hilb", 3, 5)
    C = CurveClass(2, 3)  # q = 4*10 - 9/4 > 0
    cert = certify(m, C)
    assert cert.dual_divisor.to_json() == {"a": 8, "b": -3}
    assert cert.valid


def test_json_schema_and_roundtrip():
    cert = certify(model("k3hilb", 4, 11), CurveClass(1, 7))
    data = json.loads(json.dumps(cert.to_json()))
    assert data["schema"] == "hklattice.certificate/1"
    assert set(data) >= {"input", "invariant", "normal_form", "witness", "checks", "flags"}
    for c in data["checks"]:
        assert set(c) == CHECK_KEYS and c["pass"] is True
    ok, fresh = verify_certificate(data)
    assert ok and canonical_json(fresh) == canonical_json(data)
    # tampering is detected
    data["witness"]["delta"] += 1
    assert not verify_certificate(data)[0]


def test_rationals_rendered_exactly():
    cert = certify(model("k3hilb", 2, 7), CurveClass(1, 5)).to_json()
    square_check = next(c for c in cert["checks"] if c["name"] == "input_square_positive")
    assert square_check["actual"] == "3/2"
    assert "." not in canonical_json(cert).replace("hklattice.", "")


def test_eichler_check_records_reflection():
    cert = certify(model("k3hilb", 4, 11), CurveClass(1, 7)).to_json()
    e = next(c for c in cert["checks"] if c["name"] == "eichler_equivalence")
    assert e["pass"]
    # mu = 7 has residue 1 mod 6, the normal form mu = 7 too, so no reflection
    assert e["inputs"]["reflected"] is False
    # mu = 11 is -1 mod 6: the normal form mu = 7 is reached only after reflecting along B
    cert = certify(model("k3hilb", 4, 11), CurveClass(1, 11)).to_json()
    e = next(c for c in cert["checks"] if c["name"] == "eichler_equivalence")
    assert e["pass"] and e["inputs"]["reflected"] is True
    assert cert["normal_form"]["mu"] == 7


@pytest.mark.parametrize("family", ["k3hilb", "kummer"])
def test_representative_inputs_have_requested_invariant(family):
    for n in range(2, 7):
        for inv in enumerate_invariants(family, n, 60):
            m, C = representative_input(family, n, inv)
            D = certify(m, C).dual_divisor
            assert divisor_invariants(m, D) == inv


def test_coverage_k3_n2():
    report = coverage("k3hilb", 2, 10)
    keys = [tuple(c["invariant"].values()) for c in report.certificates]
    assert (6, 2, 1) in keys
    assert not report.failures
    assert report.orbits_total == report.orbits_certified
    expected = sum(realizable("k3hilb", 2, sq, t, r) for sq in range(0, 11, 2) for t in (1, 2) for r in (0, 1))
    assert report.orbits_total == expected
    assert keys == sorted(keys)


def test_coverage_kummer():
    report = coverage("kummer", 2, 10)
    assert not report.failures
    mus = {c["normal_form"]["mu"] for c in report.certificates if c["kind"] == "positive"}
    assert mus <= {6, 7, 8, 9}
    assert report.flags.get("kummer-square-zero-by-analogy", 0) == report.zero_total


def test_square_zero_sweep_reports_gaps():
    report = square_zero_sweep("k3hilb", 2)
    assert [c["normal_form"]["mu"] for c in report.certificates] == [2]
    assert [(f["b"], f["reason"]) for f in report.failures] == [(3, NO_INTEGRAL_S)]


def test_certificates_for_curve_grid():
    for n in (2, 3, 4):
        for s in range(1, 12):
            m = model("k3hilb", n, s)
            for a in (1, 2, 3):
                for mu in range(-12, 13):
                    C = CurveClass(a, mu)
                    if gcd(a, mu) != 1 or q_curve(m, C) < 0:
                        continue
                    cert = certify(m, C)
                    assert cert.valid
                    assert verify_certificate(cert.to_json())[0]
