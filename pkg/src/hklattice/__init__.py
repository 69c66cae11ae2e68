"""Exact lattice engine for rational-curve certificates on K3^[n]- and Kummer-type manifolds."""

from .brill_noether import SeveriQuery, Witness, curve_class_of_severi, severi_dims, severi_exists, witness
from .certifier import (
    Certificate,
    CertificationFailure,
    CoverageReport,
    certify,
    certify_positive,
    certify_zero,
    coverage,
    square_zero_sweep,
    verify_certificate,
)
from .lattice import (
    DiscElement,
    DiscriminantGroup,
    IntegerLattice,
    direct_sum,
    disc_class,
    discriminant_group,
    divisibility,
    evaluate,
    is_primitive,
    smith_normal_form,
    standard_lattice,
)
from .models import (
    CurveClass,
    DivisorClass,
    Family,
    HKModel,
    OrbitInvariant,
    degree,
    divisor_invariants,
    dual_divisor,
    model,
    phi,
    q_curve,
    q_divisor,
)
from .monodromy import (
    NoRepresentative,
    NormalForm,
    eichler_equivalent,
    mu_normal_form,
    orbit_oracle,
    realizable,
)

__version__ = "0.1.0"
