"""The twelve acceptance criteria, each at its stated tolerance.

A per-criterion PASS/FAIL line is printed in the terminal summary (see conftest.py).
"""
import math
import random
import time
from collections import Counter

import numpy as np
import pytest

from bcfields import adelic, cli, kms, klattice, oracles, verify
from bcfields.adelic import CylinderFunction, parse_level, points, unit_points
from bcfields.errors import DomainError, NEGATIVE_BETA_MESSAGE
from bcfields.numfield import Ideal, enumerate_ideals, make_field, primes_up_to_norm, reduce_mod, split_prime
from bcfields.zeta import (
    conductor_primes,
    euler_factor,
    euler_ratio,
    make_character,
    parse_character,
    primes_upto,
    zeta_euler_smooth,
    zeta_partial,
    zeta_tail_bound,
)

Q = make_field("Q")
GAUSS = make_field("Q(sqrt-1)")

MATRIX = [(Q, "2"), (Q, "12"), (Q, "2^2,3^1"), (Q, "8"), (Q, "2^3,3^2,5^1"),
          (GAUSS, "2^1"), (GAUSS, "2^2,5^1"), (GAUSS, "3^1,5:2^2"),
          (make_field("Q(sqrt-3)"), "2^1,3^2"), (make_field("Q(sqrt-2)"), "2^3,3^1")]


def random_function(L, rng):
    return CylinderFunction.from_function(L, lambda y: complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))


@pytest.mark.criterion(1, "ideal enumeration matches the Gaussian-integer oracle")
def test_c01_ideal_enumeration():
    t0 = time.perf_counter()
    ideals = enumerate_ideals(GAUSS, 100)
    elapsed = time.perf_counter() - t0
    got = Counter(int(a.norm) for a in ideals)
    want = oracles.ideal_norm_counts(GAUSS, 100)
    assert all(got.get(n, 0) == want[n] for n in range(1, 101))
    assert len(ideals) == int(want.sum())
    assert elapsed < 1.0


@pytest.mark.criterion(2, "Dirichlet sum and smooth Euler product agree within the tail")
@pytest.mark.parametrize("F", [Q, GAUSS], ids=["Q", "Q(i)"])
def test_c02_dirichlet_vs_euler(F):
    gap = abs(zeta_partial(F, 3.0, 10**4) - zeta_euler_smooth(F, 3.0, 10**4))
    tb = zeta_tail_bound(F, 3.0, 10**4)
    assert gap <= tb.bound
    # smooth-sum identity: product over norms <= 100 equals the sum over 100-smooth ideals
    direct = oracles.smooth_zeta_direct(F, 3.0, 100, 10**6)
    assert abs(direct - zeta_euler_smooth(F, 3.0, 100)) <= 1e-12


@pytest.mark.criterion(3, "Gaussian Euler factors split as zeta times L(chi_-4)")
def test_c03_zeta_factorization():
    chi4 = make_character(4, (1,))
    worst = 0.0
    for p in primes_upto(10**4):
        p = int(p)
        for beta in (1.5, 2.0, 3.0):
            rhs = 1 / ((1 - p ** -beta) * (1 - chi4(p).real * p ** -beta))
            worst = max(worst, abs(euler_factor(GAUSS, p, beta) - rhs))
    assert worst <= 1e-12
    B = 10**4
    Z = kms.partition_function(GAUSS, 2.0, B)
    assert abs(Z - math.pi ** 2 / 6 * oracles.CATALAN) <= zeta_tail_bound(GAUSS, 2.0, B).bound


@pytest.mark.criterion(4, "cylinder masses sum to one and are refinement-consistent")
def test_c04_normalization_refinement():
    t0 = time.perf_counter()
    worst_norm = worst_ref = 0.0
    for F, lv in MATRIX:
        L = parse_level(F, lv)
        for beta in (0.5, 1.0, 1.5, 2.0, 5.0):
            total = math.fsum(adelic.cylinder_measure(L, beta, y) for y in points(L))
            worst_norm = max(worst_norm, abs(total - 1))
            for P in primes_up_to_norm(F, 5):
                worst_ref = max(worst_ref, adelic.refinement_residual(L, beta, P))
    assert worst_norm <= 1e-12
    assert worst_ref <= 1e-12
    assert time.perf_counter() - t0 < 5.0


@pytest.mark.criterion(5, "scaling condition mu(aZ) = N(a)^-beta mu(Z)")
@pytest.mark.parametrize("F,lv", [(Q, "12"), (Q, "2^2,3^1,5^1"), (GAUSS, "2^1,5:2^1"), (GAUSS, "2^2,3^1")],
                         ids=["Q-12", "Q-60", "Qi-10", "Qi-36"])
def test_c05_scaling(F, lv):
    L = parse_level(F, lv)
    rng = random.Random(3)
    pts = points(L)
    sets = [[y] for y in pts] + [rng.sample(pts, max(1, len(pts) // 3)) for _ in range(5)]
    worst = 0.0
    for a in enumerate_ideals(F, 20):
        for beta in (0.5, 1.0, 1.5, 2.0):
            for Z in sets:
                worst = max(worst, adelic.scaling_residual(L, beta, a, Z))
    assert worst <= 1e-12


@pytest.mark.criterion(6, "KMS condition within the reported tail; off-diagonal terms exactly zero")
@pytest.mark.parametrize("F,lv", [(Q, "12"), (Q, "2^3,3^2,5^1"), (GAUSS, "2^1,5:2^1"), (GAUSS, "2^2,5^1")],
                         ids=["Q-12", "Q-360", "Qi-10", "Qi-400"])
def test_c06_kms_condition(F, lv):
    L = parse_level(F, lv)
    assert int(L.ideal.norm) <= 1000
    rng = random.Random(9)
    ideals = enumerate_ideals(F, 10)
    w = unit_points(L)[-1]
    for beta in (1.2, 2.0):
        st = kms.extremal_state(L, beta, w, 3000)
        for a in ideals:
            f, g = random_function(L, rng), random_function(L, rng)
            for x, y in ((kms.Monomial(f, a), kms.Monomial(g, a, True)),
                         (kms.Monomial(f, a, True), kms.Monomial(g, a))):
                r = kms.kms_residual(st, x, y)
                assert r.residual <= r.tail
        f = CylinderFunction.constant(L)
        for a in ideals:
            if not a.is_unit:
                assert kms.monomial_eval(st, kms.Monomial(f, a)) == 0
            for b in ideals:
                if a != b:
                    r = kms.kms_residual(st, kms.Monomial(f, a), kms.Monomial(f, b, True))
                    assert r.residual == 0


@pytest.mark.criterion(7, "extremal states, barycenter identity and the free transitive symmetry action")
def test_c07_extremal_structure():
    rng = random.Random(13)
    for F, lv, B in [(Q, "12", 5000), (GAUSS, "2^2,5^1", 1500)]:
        L = parse_level(F, lv)
        f = random_function(L, rng)
        z = zeta_euler_smooth(F, 2.0, B)
        for w in unit_points(L):
            via_nu = kms.state_from_Y0_measure(F, 2.0, {w: 1.0}, f, B)
            assert abs(via_nu - oracles.extremal_direct(F, 2.0, w, f, B, z)) <= 1e-10
    L = parse_level(Q, "12")
    st = kms.barycenter_state(L, 2.0, kms.uniform_Y0_measure(L), 10**5)
    for _ in range(5):
        f = random_function(L, rng)
        v, tail = st.evaluate(f)
        assert abs(v - kms.product_measure_eval(f, 2.0)) <= tail
    Y0 = unit_points(L)
    units = [y.residue for y in Y0]
    for y in Y0:
        images = [adelic.symmetry_action(L, u, y) for u in units]
        assert set(images) == set(Y0)
        assert len(set(images)) == len(units)


@pytest.mark.criterion(8, "projection idempotent, contractive, norm identity and Euler-ratio norm")
def test_c08_projection():
    L = parse_level(Q, "2^2,3^1")
    rng = random.Random(23)
    for _ in range(5):
        f = random_function(L, rng)
        pf = kms.projection_apply(Q, 2.0, L.primes, f)
        ppf = kms.projection_apply(Q, 2.0, L.primes, pf)
        assert max(abs(pf(u) - ppf(u)) for u in pf.values) <= 1e-10
        assert pf.norm_sq() <= kms.l2_norm_sq(f, 2.0) + 1e-10
    P2 = split_prime(Q, 2)[0]
    f = CylinderFunction.from_function(L, lambda y: 1.0 if y.residue.to_int() % 3 == 0 else 0.0)
    lhs, rhs = kms.norm_check(Q, 2.0, [P2], f)
    assert abs(lhs - rhs) <= 1e-10
    chi = parse_character("3:1")
    A = conductor_primes(Q, chi)
    a, _ = kms.diagnostic_ideal(Q, chi)
    Lc = parse_level(Q, "9")
    cf = kms.character_function(Lc, chi, a)
    for B in (50, 1000):
        S = sorted(set(primes_up_to_norm(Q, B)) | set(A))
        got = kms.projection_apply(Q, 2.0, S, cf).norm()
        want = float(a.norm) ** -2.0 * euler_ratio(Q, chi, A, 2.0, B)
        assert abs(got - want) <= 1e-10


@pytest.mark.criterion(9, "uniqueness diagnostic monotone, small at beta=1, matches |L|/zeta at 1.5")
def test_c09_uniqueness_dichotomy():
    t0 = time.perf_counter()
    chi = parse_character("3:1")
    bounds = [10**k for k in range(1, 7)]
    for beta in np.round(np.arange(0.2, 2.0001, 0.1), 10):
        r = kms.uniqueness_scan(Q, chi, float(beta), bounds)
        assert all(b <= a for a, b in zip(r, r[1:]))
    assert kms.uniqueness_diagnostic(Q, chi, 1.0, 10**6) < 0.1
    want = 3 ** -1.5 * abs(oracles.l_series(chi, 1.5)) / oracles.riemann_zeta(1.5)
    assert abs(kms.uniqueness_diagnostic(Q, chi, 1.5, 10**6) - want) <= 1e-3
    assert time.perf_counter() - t0 < 180


@pytest.mark.criterion(10, "beta=50 extremal states agree with ground states")
def test_c10_ground_states():
    L = parse_level(Q, "8")
    rng = random.Random(43)
    fs = [CylinderFunction.indicator(L, [y]) for y in points(L)] + [random_function(L, rng) for _ in range(5)]
    for w in unit_points(L):
        st = kms.extremal_state(L, 50.0, w, 1000)
        for f in fs:
            assert abs(st(f) - f(w)) <= 1e-10


def _triples(L, rng, n):
    for _ in range(n):
        l1 = klattice.random_lattice(L, rng)
        if rng.random() < 0.5:
            l2 = klattice.transport(l1, Ideal.from_factors({P: rng.randint(0, 2) for P in L.primes}))
            l3 = klattice.transport(l2, Ideal.from_factors({P: rng.randint(0, 2) for P in L.primes}))
        else:
            l2, l3 = klattice.random_lattice(L, rng), klattice.random_lattice(L, rng)
        yield l1, l2, l3


@pytest.mark.criterion(11, "K-lattice equivalence, balancing, groupoid law and Y0 correspondence")
@pytest.mark.parametrize("F,lv", [(Q, "12"), (GAUSS, "2^2,5^1")], ids=["Q-12", "Qi-20"])
def test_c11_klattices(F, lv):
    L = parse_level(F, lv)
    rng = random.Random(29)
    c = klattice.commensurable
    for l1, l2, l3 in _triples(L, rng, 1000):
        assert c(l1, l1)
        assert c(l1, l2) == c(l2, l1)
        if c(l1, l2) and c(l2, l3):
            assert c(l1, l3)
            g12, y12 = klattice.to_groupoid(l1, l2)
            g23, _ = klattice.to_groupoid(l2, l3)
            g13, y13 = klattice.to_groupoid(l1, l3)
            assert g13 == g12 * g23 and y13 == y12
        assert klattice.to_groupoid(l1, l1)[0].is_unit
        while True:
            u = (rng.randint(-99, 99), 0 if F.is_rational else rng.randint(-99, 99))
            if reduce_mod(F, u, L.ideal).is_unit():
                break
        b1 = klattice.balance(l1, u)
        assert b1 == l1 and c(b1, l2) == c(l1, l2)
        if c(l1, l2):
            assert klattice.to_groupoid(b1, l2) == klattice.to_groupoid(l1, l2)


@pytest.mark.criterion(11, "K-lattice equivalence, balancing, groupoid law and Y0 correspondence")
def test_c11_invertible_lattices_are_Y0():
    L = parse_level(Q, "12")
    Y0 = set(unit_points(L))
    for e in (-1, 0, 1):
        a = Ideal.from_factors({P: e for P in L.primes})
        for x in range(144):
            lat = klattice.make_lattice(Q, a, 1, x, L)
            assert klattice.is_invertible(lat) == (klattice.y_point(lat) in Y0)


@pytest.mark.criterion(12, "negative beta rejected by every state and measure constructor")
def test_c12_negative_beta(capsys):
    L = parse_level(Q, "12")
    w = unit_points(L)[0]
    f = CylinderFunction.constant(L)
    P2 = split_prime(Q, 2)[0]
    ctors = [lambda b: adelic.cylinder_measure(L, b, w),
             lambda b: adelic.local_coset_measure(Q, P2, b, (1, 1)),
             lambda b: adelic.set_measure(L, b, [w]),
             lambda b: adelic.zero_fiber_set(L, P2, 1, b),
             lambda b: adelic.scaling_residual(L, b, Ideal(), [w]),
             lambda b: kms.subcritical_state(L, b),
             lambda b: kms.extremal_state(L, b, w, 100),
             lambda b: kms.barycenter_state(L, b, {w: 1.0}, 100),
             lambda b: kms.extremal_state_eval(Q, b, w, f, 100),
             lambda b: kms.subcritical_state_eval(Q, b, f),
             lambda b: kms.state_from_Y0_measure(Q, b, {w: 1.0}, f, 100),
             lambda b: kms.projection_apply(Q, b, L.primes, f)]
    for ctor in ctors:
        for beta in (-0.5, -2.0, -math.inf):
            with pytest.raises(DomainError, match=NEGATIVE_BETA_MESSAGE):
                ctor(beta)
    code = cli.main(["state", "--field", "Q", "--level", "12", "--beta", "-1", "--w", "7"])
    assert code == 2
    assert NEGATIVE_BETA_MESSAGE in capsys.readouterr().err
    [result] = verify.run("quick", ["space.negative_beta"])
    assert result.passed
