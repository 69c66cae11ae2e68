import itertools
import random
from collections import Counter, defaultdict
from math import gcd

import numpy as np
import pytest

from hklattice import lattice as lat
from hklattice.models import (
    DivisorClass,
    OrbitInvariant,
    divisor_invariants,
    embed_divisor,
    exceptional_order,
    fold_residue,
    model,
    reflect_exceptional,
)
from hklattice.monodromy import (
    NoRepresentative,
    _Conservation,
    canonical_mu,
    eichler_equivalent,
    eichler_generators,
    mu_normal_form,
    orbit_components,
    orbit_oracle,
    realizable,
    transvection_matrix,
)

U = lat.standard_lattice("U")


def u2_plus(k):
    return lat.direct_sum(U, U, lat.standard_lattice("rank1", -2 * k))


def primitive_box(L, bound):
    return [v for v in itertools.product(range(-bound, bound + 1), repeat=L.rank)
            if any(v) and lat.is_primitive(L, v)]


# -- Eichler criterion ------------------------------------------------------------

def test_eichler_examples():
    UU = lat.direct_sum(U, U)
    assert eichler_equivalent(UU, (1, 0, 0, 0), (1, 0, 0, 0))
    assert eichler_equivalent(UU, (1, 0, 0, 0), (0, 1, 0, 0))
    L = u2_plus(1)
    v = (1, 3, 0, 0, 0)  # square 6, div 1
    w = (1, 2, 0, 0, 0)  # square 4, div 1
    assert not eichler_equivalent(L, v, w)


def test_eichler_requires_u2_and_primitive():
    with pytest.raises(ValueError, match="U\\^2"):
        eichler_equivalent(lat.direct_sum(U, lat.standard_lattice("rank1", -2)), (1, 0, 0), (0, 1, 0))
    with pytest.raises(ValueError, match="primitive"):
        eichler_equivalent(u2_plus(1), (2, 0, 0, 0, 0), (1, 0, 0, 0, 0))


def test_eichler_is_not_sign_folded():
    L = u2_plus(3)  # A_L = Z/6
    v = (3, 0, 0, 0, 1)  # square -6, div 3, class 2[B/6]
    w = (3, 0, 0, 0, -1)  # class 4[B/6]
    assert lat.square(L, v) == lat.square(L, w)
    assert lat.disc_class(L, v).coeffs != lat.disc_class(L, w).coeffs
    assert not eichler_equivalent(L, v, w)


# -- transvections ------------------------------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3])
def test_generators_are_isometries(k):
    L = u2_plus(k)
    G = np.array(L.gram)
    gens = eichler_generators(L)
    assert len(gens) == 4 * 3 * 2
    for T in gens:
        assert (T.T @ G @ T == G).all()
        assert round(abs(np.linalg.det(T))) == 1
    # closed under inverses: E(e, a) E(e, -a) = 1
    keys = {T.tobytes() for T in gens}
    for T in gens:
        inv = np.rint(np.linalg.inv(T)).astype(np.int64)
        assert inv.tobytes() in keys


def test_transvection_requires_isotropic_orthogonal_pair():
    L = u2_plus(1)
    with pytest.raises(ValueError):
        transvection_matrix(L, (1, 0, 0, 0, 0), (0, 1, 0, 0, 0))
    with pytest.raises(ValueError):
        transvection_matrix(L, (0, 0, 0, 0, 1), (1, 0, 0, 0, 0))


def test_conservation_guard_catches_a_non_isometry():
    L = u2_plus(1)
    guard = _Conservation(L, (0, 0, 0, 0, 1))
    guard.check(np.array([[0, 0, 0, 0, 1], [0, 0, 0, 0, -1]]))
    with pytest.raises(AssertionError, match="square"):
        guard.check(np.array([[1, 0, 0, 0, 0]]))
    with pytest.raises(AssertionError, match="class"):
        guard.check(np.array([[1, -1, 0, 0, 0]]))  # square -2 but trivial class


def test_oracle_examples():
    L = u2_plus(1)
    r = orbit_oracle(L, (0, 0, 0, 0, 1), (0, 0, 0, 0, 1))
    assert r.reached and r.depth == 0
    # two square -2, divisibility 2 vectors with the class of B/2
    v, w = (0, 0, 0, 0, 1), (2, 0, 0, 2, 1)
    assert lat.square(L, w) == -2 and lat.divisibility(L, w) == 2
    assert eichler_equivalent(L, v, w)
    assert orbit_oracle(L, v, w, 12).status == "Reached"
    # same square, different class: never reached, whatever the bound
    w2 = (1, -1, 0, 0, 0)
    for bound in (2, 5, 9):
        assert orbit_oracle(L, v, w2, bound).status == "NotReachedWithinBound"
    with pytest.raises(ValueError, match="equal square"):
        orbit_oracle(L, v, (1, 0, 0, 0, 0))


def test_oracle_is_deterministic():
    L = u2_plus(2)
    a = orbit_oracle(L, (1, 2, 0, 1, 1), (2, 1, 1, 0, 1), 6)
    b = orbit_oracle(L, (1, 2, 0, 1, 1), (2, 1, 1, 0, 1), 6)
    assert a == b


def test_components_agree_with_pairwise_oracle():
    L = u2_plus(2)
    vecs = primitive_box(L, 2)
    labels = orbit_components(L, vecs, 6)
    rng = random.Random(7)
    by_sq = defaultdict(list)
    for i, v in enumerate(vecs):
        by_sq[lat.square(L, v)].append(i)
    pairs = []
    for idx in by_sq.values():
        if len(idx) > 1:
            pairs += [tuple(rng.sample(idx, 2)) for _ in range(3)]
    for i, j in pairs[:60]:
        assert orbit_oracle(L, vecs[i], vecs[j], 6).reached == (labels[i] == labels[j])


@pytest.mark.slow
def test_oracle_agreement_k3():
    """U^2 + <-6>, coordinates in [-4, 4]: Reached implies Eichler-equivalent,
    and >= 95% of Eichler-equivalent pairs are Reached with coefficient bound 16."""
    L = u2_plus(3)
    vecs = primitive_box(L, 4)
    labels = orbit_components(L, vecs, 16)
    groups = defaultdict(Counter)
    comp_group = {}
    for v, lab in zip(vecs, labels):
        key = (lat.square(L, v), lat.disc_class(L, v).coeffs)
        assert comp_group.setdefault(lab, key) == key
        groups[key][lab] += 1
    total = reached = 0
    for comps in groups.values():
        size = sum(comps.values())
        total += size * (size - 1) // 2
        reached += sum(c * (c - 1) // 2 for c in comps.values())
    assert reached >= 0.95 * total


# -- realizability -------------------------------------------------------------------

def brute_force_invariants(family, n, max_square):
    """Invariants of actual primitive divisors aH + bB, using closed forms."""
    M = exceptional_order(family, n)
    found = set()
    for a in range(1, M + 1):
        for b in range(-2 * M, 2 * M + 1):
            if gcd(a, b) != 1:
                continue
            for sq in range(2, max_square + 1, 2):
                num = sq + b * b * M
                if num % (2 * a * a):
                    continue
                div = gcd(a, b * M)
                found.add((sq, div, fold_residue(b * M // div, M)))
    return found


@pytest.mark.parametrize("family,n", [("k3hilb", n) for n in range(2, 8)] + [("kummer", n) for n in range(2, 5)])
def test_realizable_matches_brute_force(family, n):
    M = exceptional_order(family, n)
    bf = brute_force_invariants(family, n, 40)
    claimed = {(sq, t, r) for sq in range(2, 41, 2) for t in range(1, M + 1)
               for r in range(M // 2 + 1) if realizable(family, n, sq, t, r)}
    assert claimed == bf


@pytest.mark.parametrize("n", range(2, 11))
def test_realizable_footnote(n):
    M = 2 * n - 2
    r = M // 2  # unique element of order 2
    for sq in range(-60, 61, 2):
        assert realizable("k3hilb", n, sq, 2, r) == ((sq - (2 - 2 * n)) % 8 == 0)
        assert realizable("k3hilb", n, sq, 1, 0)
    assert realizable("k3hilb", 2, 6, 2, 1)
    assert not realizable("k3hilb", 2, 6, 3, 1)


# -- normal forms --------------------------------------------------------------------

def test_normal_form_examples():
    nf = mu_normal_form("k3hilb", 2, OrbitInvariant(6, 2, 1))
    assert (nf.s, nf.t, nf.mu) == (3, 2, 3)
    for d in range(1, 10):
        nf = mu_normal_form("k3hilb", 2, OrbitInvariant(8 * d - 2, 2, 1))
        assert (nf.s, nf.t, nf.mu) == (d + 2, 2, 3)
    for n in range(2, 8):
        for sigma in range(1, 12):
            nf = mu_normal_form("k3hilb", n, OrbitInvariant(2 * sigma, 1, 0))
            assert (nf.s, nf.t, nf.mu) == (sigma + n - 1, 1, 2 * n - 2)
            assert nf.divisor == DivisorClass(1, -1)


def test_normal_form_errors():
    with pytest.raises(NoRepresentative):
        mu_normal_form("k3hilb", 2, OrbitInvariant(4, 2, 1))  # 4 is not 6 mod 8
    with pytest.raises(ValueError):
        mu_normal_form("k3hilb", 2, OrbitInvariant(0, 1, 0))


@pytest.mark.parametrize("family", ["k3hilb", "kummer"])
def test_normal_form_soundness_and_idempotence(family):
    for n in range(2, 11):
        M = exceptional_order(family, n)
        for sq in range(2, 101, 2):
            for t in range(1, M + 1):
                for r in range(M // 2 + 1):
                    if not realizable(family, n, sq, t, r):
                        continue
                    inv = OrbitInvariant(sq, t, r)
                    nf = mu_normal_form(family, n, inv)
                    assert M <= nf.mu <= M + M // 2
                    assert nf.t == M // gcd(M, nf.mu)
                    got = divisor_invariants(model(family, n, nf.s), nf.divisor)
                    assert got == inv
                    again = mu_normal_form(family, n, got)
                    assert (again.s, again.t, again.mu) == (nf.s, nf.t, nf.mu)


@pytest.mark.parametrize("family", ["k3hilb", "kummer"])
def test_residue_coverage(family):
    for n in range(2, 21):
        M = exceptional_order(family, n)
        window = range(M, M + M // 2 + 1)
        assert {fold_residue(mu, M) for mu in window} == {fold_residue(c, M) for c in range(M)}
        for r in range(M // 2 + 1):
            assert fold_residue(canonical_mu(family, n, r), M) == r


def test_normal_form_is_eichler_equivalent_to_inputs():
    for n in (2, 3, 4, 6):
        for s in range(1, 6):
            m = model("k3hilb", n, s)
            for a in range(1, 7):
                for b in range(-8, 9):
                    if gcd(a, b) != 1 or 2 * s * a * a - b * b * m.order <= 0:
                        continue
                    D = DivisorClass(a, b)
                    nf = mu_normal_form("k3hilb", n, divisor_invariants(m, D))
                    v = embed_divisor(m, D)
                    w = embed_divisor(nf.model, nf.divisor)
                    w_ref = embed_divisor(nf.model, reflect_exceptional(nf.divisor))
                    assert eichler_equivalent(m.ambient, v, w) or eichler_equivalent(m.ambient, v, w_ref)
