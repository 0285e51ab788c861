"""Named invariant checks over every module, runnable as a quick or full suite."""
from __future__ import annotations

import csv
import io
import math
import random
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import adelic, kms, klattice, oracles
from .adelic import CylinderFunction, parse_level, points, unit_points
from .errors import DomainError, ValidationError
from .numfield import (
    Ideal,
    elem_mul,
    enumerate_ideals,
    make_field,
    primes_up_to_norm,
    rational_ideal,
    reduce_mod,
    split_prime,
)
from .zeta import (
    conductor_primes,
    euler_ratio,
    euler_factor,
    euler_ratio_scan,
    l_partial,
    make_character,
    parse_character,
    primes_upto,
    zeta_euler_smooth,
    zeta_partial,
    zeta_tail_bound,
)

Q = make_field("Q")
GAUSS = make_field("Q(sqrt-1)")

LEVELS = [(Q, "2"), (Q, "12"), (Q, "2^2,3^1"), (Q, "8"), (Q, "2^3,3^2,5^1"),
          (GAUSS, "2^1"), (GAUSS, "2^2,5^1"), (GAUSS, "3^1,5:2^2"),
          (make_field("Q(sqrt-3)"), "2^1,3^2"), (make_field("Q(sqrt-2)"), "2^3,3^1")]


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    seconds: float = 0.0


@dataclass(frozen=True)
class Check:
    name: str
    fn: Callable[[str], tuple[bool, float]]
    full_only: bool = False


REGISTRY: dict[str, Check] = {}


def check(name: str, full_only: bool = False):
    def deco(fn):
        REGISTRY[name] = Check(name, fn, full_only)
        return fn
    return deco


# ---------------------------------------------------------------------------
# number_field

@check("number_field.split_degrees")
def _split_degrees(profile):
    worst = 0
    for F in (GAUSS, make_field("Q(sqrt5)"), make_field("Q(sqrt-3)"), make_field("Q(sqrt-163)"), make_field("Q(sqrt6)")):
        for p in primes_upto(1000):
            s = sum((2 if P.ramified else 1) * P.f for P in split_prime(F, int(p)))
            worst = max(worst, abs(s - 2))
    return worst == 0, float(worst)


@check("number_field.gaussian_ideal_count")
def _gaussian_count(profile):
    got = len(enumerate_ideals(GAUSS, 100))
    want = oracles.ideal_count(GAUSS, 100)
    return got == want, float(abs(got - want))


@check("number_field.norm_multiplicative")
def _norm_mult(profile):
    rng = random.Random(7)
    bad = 0
    for F in (Q, GAUSS, make_field("Q(sqrt5)")):
        primes = primes_up_to_norm(F, 60)
        for _ in range(500):
            a = Ideal.from_factors({rng.choice(primes): rng.randint(-3, 3) for _ in range(3)})
            b = Ideal.from_factors({rng.choice(primes): rng.randint(-3, 3) for _ in range(3)})
            bad += (a * b).norm != a.norm * b.norm
    return bad == 0, float(bad)


@check("number_field.residue_homomorphism")
def _crt(profile):
    rng = random.Random(11)
    bad = 0
    for F, lv in LEVELS:
        m = parse_level(F, lv).ideal
        for _ in range(200):
            x = (rng.randint(-500, 500), rng.randint(-500, 500) if not F.is_rational else 0)
            y = (rng.randint(-500, 500), rng.randint(-500, 500) if not F.is_rational else 0)
            rx, ry = reduce_mod(F, x, m), reduce_mod(F, y, m)
            bad += rx * ry != reduce_mod(F, elem_mul(F, x, y), m)
            bad += rx + ry != reduce_mod(F, (x[0] + y[0], x[1] + y[1]), m)
            if F.is_rational:
                bad += rx.to_int() != x[0] % int(m.norm)
    return bad == 0, float(bad)


# ---------------------------------------------------------------------------
# zeta_lfunctions

@check("zeta.dirichlet_vs_euler")
def _dir_vs_euler(profile):
    worst = 0.0
    ok = True
    for F in (Q, GAUSS):
        B = 10**4
        gap = abs(zeta_partial(F, 3.0, B) - zeta_euler_smooth(F, 3.0, B))
        tb = zeta_tail_bound(F, 3.0, B)
        ok &= tb.rigorous and gap <= tb.bound
        worst = max(worst, gap / tb.bound)
    return ok, worst


@check("zeta.smooth_identity")
def _smooth(profile):
    worst = 0.0
    for F in (Q, GAUSS):
        direct = oracles.smooth_zeta_direct(F, 3.0, 100, 10**6)
        worst = max(worst, abs(direct - zeta_euler_smooth(F, 3.0, 100)))
    return worst <= 1e-12, worst


@check("zeta.gaussian_factorization")
def _factorization(profile):
    chi4 = make_character(4, (1,))
    worst = 0.0
    for p in primes_upto(10**4):
        p = int(p)
        for beta in (1.5, 2.0, 3.0):
            lhs = euler_factor(GAUSS, p, beta)
            rhs = 1 / ((1 - p ** -beta) * (1 - chi4(p).real * p ** -beta))
            worst = max(worst, abs(lhs - rhs))
    # partition function at beta = 2 against zeta(2) L(chi_-4, 2)
    B = 10**4
    pf = kms.partition_function(GAUSS, 2.0, B)
    target = math.pi ** 2 / 6 * oracles.CATALAN
    tb = zeta_tail_bound(GAUSS, 2.0, B).bound
    ok = worst <= 1e-12 and abs(pf - target) <= tb
    return ok, worst


@check("zeta.ratio_monotone")
def _ratio_monotone(profile):
    bounds = [10, 100, 1000, 10**4, 10**5]
    worst = 0.0
    for F in (Q, GAUSS):
        for chi in (make_character(3, (1,)), make_character(5, (1,)), make_character(5, (2,)), make_character(8, (1, 1))):
            A = conductor_primes(F, chi)
            for beta in (0.5, 1.0, 1.5, 2.0):
                r = euler_ratio_scan(F, chi, A, beta, bounds)
                worst = max(worst, max(b - a for a, b in zip(r, r[1:])))
    return worst <= 0, worst


@check("zeta.catalan")
def _catalan(profile):
    err = abs(l_partial(make_character(4, (1,)), 2.0, 10**6).real - oracles.CATALAN)
    return err <= 1e-5, err


@check("zeta.divergence_marker")
def _divergence(profile):
    a, b = zeta_partial(Q, 1.0, 10**3), zeta_partial(Q, 1.0, 10**6)
    return b > a + 1, b - a


# ---------------------------------------------------------------------------
# adelic_space

@check("space.normalization")
def _normalization(profile):
    worst = 0.0
    for F, lv in LEVELS:
        L = parse_level(F, lv)
        for beta in (0.5, 1.0, 1.5, 2.0, 5.0):
            total = math.fsum(adelic.cylinder_measure(L, beta, y) for y in points(L))
            worst = max(worst, abs(total - 1))
    return worst <= 1e-12, worst


@check("space.refinement")
def _refinement(profile):
    worst = 0.0
    for F, lv in LEVELS[:7]:
        L = parse_level(F, lv)
        for P in primes_up_to_norm(F, 5):
            for beta in (0.5, 1.5, 5.0):
                worst = max(worst, adelic.refinement_residual(L, beta, P))
    return worst <= 1e-12, worst


@check("space.scaling")
def _scaling(profile):
    worst = 0.0
    rng = random.Random(3)
    cases = [(Q, "12"), (GAUSS, "2^1,5:2^1")] if profile == "quick" else \
        [(Q, "12"), (Q, "2^2,3^1,5^1"), (GAUSS, "2^1,5:2^1"), (GAUSS, "2^2,3^1,5^1")]
    for F, lv in cases:
        L = parse_level(F, lv)
        pts = points(L)
        sets = [[y] for y in pts] + [rng.sample(pts, max(1, len(pts) // 3)) for _ in range(5)]
        for a in enumerate_ideals(F, 20):
            for beta in (0.5, 1.0, 1.5, 2.0):
                for Z in sets:
                    worst = max(worst, adelic.scaling_residual(L, beta, a, Z))
    return worst <= 1e-12, worst


@check("space.zero_fiber")
def _zero_fiber(profile):
    worst = 0.0
    L = parse_level(Q, "2^4,3^1")
    P = split_prime(Q, 2)[0]
    for k in range(0, 5):
        for beta in (0.5, 2.0):
            _, mass = adelic.zero_fiber_set(L, P, k, beta)
            worst = max(worst, abs(mass - 2.0 ** (-k * beta)))
    return worst <= 1e-12, worst


@check("space.symmetry_free_transitive")
def _symmetry(profile):
    bad = 0
    for F, lv in [(Q, "12"), (GAUSS, "2^2,5^1")]:
        L = parse_level(F, lv)
        Y0 = unit_points(L)
        units = [y.residue for y in Y0]
        base = Y0[0]
        orbit = {adelic.symmetry_action(L, u, base) for u in units}
        bad += orbit != set(Y0)
        if F.is_rational:
            # free: distinct units move a point to distinct points
            for y in Y0:
                bad += len({adelic.symmetry_action(L, u, y) for u in units}) != len(units)
    return bad == 0, float(bad)


@check("space.negative_beta")
def _neg_beta(profile):
    L = parse_level(Q, "12")
    w = unit_points(L)[0]
    f = CylinderFunction.constant(L)
    ctors = [lambda b: adelic.cylinder_measure(L, b, w),
             lambda b: adelic.local_coset_measure(Q, split_prime(Q, 2)[0], b, (1, 1)),
             lambda b: kms.subcritical_state(L, b),
             lambda b: kms.extremal_state(L, b, w, 100),
             lambda b: kms.barycenter_state(L, b, {w: 1.0}, 100),
             lambda b: kms.projection_apply(Q, b, L.primes, f),
             lambda b: adelic.scaling_residual(L, b, Ideal(), [w])]
    bad = 0
    for c in ctors:
        try:
            c(-0.5)
            bad += 1
        except DomainError as err:
            bad += "no KMS states for beta < 0" not in str(err)
    return bad == 0, float(bad)


# ---------------------------------------------------------------------------
# kms_engine

def _random_function(L, rng, nonneg=False):
    if nonneg:
        return CylinderFunction.from_function(L, lambda y: rng.random())
    return CylinderFunction.from_function(L, lambda y: complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))


@check("kms.unital_positive")
def _unital(profile):
    rng = random.Random(5)
    ok, worst = True, 0.0
    for F, lv in [(Q, "12"), (GAUSS, "2^2,5^1")]:
        L = parse_level(F, lv)
        w = unit_points(L)[-1]
        one = CylinderFunction.constant(L)
        states = [kms.extremal_state(L, 2.0, w, 10**4), kms.subcritical_state(L, 0.7),
                  kms.barycenter_state(L, 1.5, kms.uniform_Y0_measure(L), 10**4), kms.ground_state(L, w)]
        for st in states:
            v, tail = st.evaluate(one)
            worst = max(worst, abs(v - 1) / max(tail, 1e-300) if tail else abs(v - 1))
            ok &= abs(v - 1) <= tail + 1e-15
            for _ in range(3):
                v, tail = st.evaluate(_random_function(L, rng, nonneg=True))
                ok &= v >= -tail
    return ok, worst


@check("kms.residual")
def _kms_residual(profile):
    rng = random.Random(9)
    ok, worst = True, 0.0
    cases = [(Q, "12"), (GAUSS, "2^1,5:2^1")]
    if profile == "full":
        cases += [(Q, "2^3,3^2,5^1"), (GAUSS, "2^2,5^1,3^1")]
    betas = (1.2, 2.0) if profile == "quick" else (1.2, 2.0, 5.0)
    for F, lv in cases:
        L = parse_level(F, lv)
        w = unit_points(L)[0]
        for beta in betas:
            st = kms.extremal_state(L, beta, w, 3000)
            for a in enumerate_ideals(F, 10):
                f, g = _random_function(L, rng), _random_function(L, rng)
                r = kms.kms_residual(st, kms.Monomial(f, a), kms.Monomial(g, a, True))
                ok &= r.ok
                worst = max(worst, r.residual / r.tail)
    # the subcritical state satisfies the condition exactly
    L = parse_level(Q, "12")
    st = kms.subcritical_state(L, 0.8)
    for a in enumerate_ideals(Q, 10):
        r = kms.kms_residual(st, kms.Monomial(_random_function(L, rng), a), kms.Monomial(_random_function(L, rng), a, True))
        ok &= r.ok
    return ok, worst


@check("kms.off_diagonal")
def _off_diag(profile):
    L = parse_level(Q, "12")
    w = unit_points(L)[1]
    st = kms.extremal_state(L, 2.0, w, 1000)
    f = CylinderFunction.indicator(L, unit_points(L))
    vals = [kms.monomial_eval(st, kms.Monomial(f, rational_ideal(Q, n))) for n in (2, 3, 5, 6)]
    r = kms.kms_residual(st, kms.Monomial(f, rational_ideal(Q, 2)), kms.Monomial(f, rational_ideal(Q, 3), True))
    total = sum(abs(v) for v in vals) + r.residual
    return total == 0, float(total)


@check("kms.extremal_direct")
def _extremal_direct(profile):
    rng = random.Random(13)
    worst = 0.0
    for F, lv, B in [(Q, "12", 5000), (GAUSS, "2^2,5^1", 1500)]:
        L = parse_level(F, lv)
        f = _random_function(L, rng)
        z = zeta_euler_smooth(F, 2.0, B)
        for w in unit_points(L)[:4]:
            via_nu = kms.state_from_Y0_measure(F, 2.0, {w: 1.0}, f, B)
            direct = oracles.extremal_direct(F, 2.0, w, f, B, z)
            worst = max(worst, abs(via_nu - direct))
    return worst <= 1e-10, worst


@check("kms.barycenter_product")
def _barycenter(profile):
    L = parse_level(Q, "12")
    rng = random.Random(17)
    worst, ok = 0.0, True
    for _ in range(5):
        f = _random_function(L, rng)
        st = kms.barycenter_state(L, 2.0, kms.uniform_Y0_measure(L), 10**5)
        v, tail = st.evaluate(f)
        d = abs(v - kms.product_measure_eval(f, 2.0))
        ok &= d <= tail
        worst = max(worst, d / tail)
    return ok, worst


@check("kms.affinity")
def _affinity(profile):
    L = parse_level(GAUSS, "2^2,5^1")
    rng = random.Random(19)
    f = _random_function(L, rng)
    Y0 = unit_points(L)
    ext = {w: kms.state_from_Y0_measure(GAUSS, 1.8, {w: 1.0}, f, 2000) for w in Y0}
    worst = 0.0
    for _ in range(10):
        raw = [rng.random() for _ in Y0]
        s = math.fsum(raw)
        nu = {w: r / s for w, r in zip(Y0, raw)}
        nu[Y0[0]] += 1 - math.fsum(nu.values())
        mix = kms.state_from_Y0_measure(GAUSS, 1.8, nu, f, 2000)
        worst = max(worst, abs(mix - sum(nu[w] * ext[w] for w in Y0)))
    return worst <= 1e-12, worst


@check("kms.projection")
def _projection(profile):
    L = parse_level(Q, "2^2,3^1")
    P2 = split_prime(Q, 2)[0]
    rng = random.Random(23)
    worst = 0.0
    ok = True
    for _ in range(5):
        f = _random_function(L, rng)
        pf = kms.projection_apply(Q, 2.0, L.primes, f)
        ppf = kms.projection_apply(Q, 2.0, L.primes, pf)
        idem = max(abs(pf(u) - ppf(u)) for u in pf.values)
        worst = max(worst, idem)
        ok &= idem <= 1e-10 and pf.norm_sq() <= kms.l2_norm_sq(f, 2.0) * (1 + 1e-12)
        const = kms.projection_apply(Q, 2.0, L.primes, CylinderFunction.constant(L, 3.0))
        ok &= max(abs(v - 3.0) for v in const.values.values()) <= 1e-12
    inv = CylinderFunction.from_function(L, lambda y: 1.0 if y.residue.to_int() % 3 == 0 else 0.0)
    lhs, rhs = kms.norm_check(Q, 2.0, [P2], inv)
    worst = max(worst, abs(lhs - rhs))
    ok &= abs(lhs - rhs) <= 1e-10
    # the character function: ||Pf|| against the Euler-product ratio
    chi = parse_character("3:1")
    A = conductor_primes(Q, chi)
    for lv, a in (("3", Ideal()), ("9", rational_ideal(Q, 3))):
        Lc = parse_level(Q, lv)
        cf = kms.character_function(Lc, chi, a)
        for B in (50, 1000):
            S = sorted(set(primes_up_to_norm(Q, B)) | set(A))
            got = kms.projection_apply(Q, 2.0, S, cf).norm()
            want = float(a.norm) ** -2.0 * euler_ratio(Q, chi, A, 2.0, B)
            worst = max(worst, abs(got - want))
            ok &= abs(got - want) <= 1e-10
    return ok, worst


@check("kms.ground_limit")
def _ground(profile):
    L = parse_level(Q, "8")
    worst = 0.0
    # linearity reduces every cylinder f to the indicators of points
    for w in unit_points(L):
        st = kms.extremal_state(L, 50.0, w, 1000)
        gs = kms.ground_state(L, w)
        err = 0.0
        for y in points(L):
            ind = CylinderFunction.indicator(L, [y])
            err += abs(st(ind) - gs(ind))
        worst = max(worst, err)
    return worst <= 1e-10, worst


@check("kms.diagnostic_scan", full_only=False)
def _diagnostic(profile):
    chi = parse_character("3:1")
    top = 10**5 if profile == "quick" else 10**6
    bounds = [10**k for k in range(1, 7) if 10**k <= top]
    ok, worst = True, 0.0
    for beta in np.round(np.arange(0.2, 2.0001, 0.1), 10):
        r = kms.uniqueness_scan(Q, chi, float(beta), bounds)
        step = max(b - a for a, b in zip(r, r[1:]))
        ok &= step <= 0
        worst = max(worst, step)
    if profile == "full":
        ok &= kms.uniqueness_diagnostic(Q, chi, 1.0, 10**6) < 0.1
        want = 3 ** -1.5 * abs(oracles.l_series(chi, 1.5)) / oracles.riemann_zeta(1.5)
        got = kms.uniqueness_diagnostic(Q, chi, 1.5, 10**6)
        ok &= abs(got - want) <= 1e-3
    return ok, worst


@check("kms.partition_function")
def _partition(profile):
    got = kms.partition_function(Q, 2.0, 10**6)
    err = abs(got - math.pi ** 2 / 6)
    return err <= 1e-5 and kms.partition_function(Q, 2.0, 1) == 1.0 and kms.partition_function(Q, 1.0, 10) == math.inf, err


# ---------------------------------------------------------------------------
# klattice

def _lattice_triples(L, rng, n):
    """Random triples; ``linked`` marks pairs built by transport (commensurable exactly,
    not just at level precision)."""
    for _ in range(n):
        l1 = klattice.random_lattice(L, rng)
        linked = [False, False]
        if rng.random() < 0.5:
            g = Ideal.from_factors({P: rng.randint(0, 2) for P in L.primes})
            l2 = klattice.transport(l1, g)
            linked[0] = True
            if rng.random() < 0.7:
                h = Ideal.from_factors({P: rng.randint(0, 2) for P in L.primes})
                l3 = klattice.transport(l2, h)
                linked[1] = True
            else:
                l3 = klattice.random_lattice(L, rng)
        else:
            l2, l3 = klattice.random_lattice(L, rng), klattice.random_lattice(L, rng)
        yield l1, l2, l3, linked


@check("lattice.equivalence")
def _equivalence(profile):
    bad = 0
    for F, lv in [(Q, "12"), (GAUSS, "2^2,5^1")]:
        L = parse_level(F, lv)
        rng = random.Random(29)
        for l1, l2, l3, _ in _lattice_triples(L, rng, 1000):
            c = klattice.commensurable
            bad += not c(l1, l1)
            bad += c(l1, l2) != c(l2, l1)
            bad += c(l1, l2) and c(l2, l3) and not c(l1, l3)
    return bad == 0, float(bad)


@check("lattice.balancing")
def _balancing(profile):
    bad = 0
    for F, lv in [(Q, "12"), (GAUSS, "2^2,5^1")]:
        L = parse_level(F, lv)
        rng = random.Random(31)
        for l1, l2, _, _ in _lattice_triples(L, rng, 300):
            u = _random_unit(F, L, rng)
            b1 = klattice.balance(l1, u)
            bad += b1 != l1
            bad += klattice.commensurable(b1, l2) != klattice.commensurable(l1, l2)
            if klattice.commensurable(l1, l2):
                bad += klattice.to_groupoid(b1, l2) != klattice.to_groupoid(l1, l2)
    return bad == 0, float(bad)


def _random_unit(F, L, rng):
    while True:
        u = (rng.randint(-99, 99), 0 if F.is_rational else rng.randint(-99, 99))
        if reduce_mod(F, u, L.ideal).is_unit():
            return u


@check("lattice.groupoid")
def _groupoid(profile):
    bad = 0
    for F, lv in [(Q, "12"), (GAUSS, "2^2,5^1")]:
        L = parse_level(F, lv)
        rng = random.Random(37)
        for l1, l2, l3, linked in _lattice_triples(L, rng, 300):
            c = klattice.commensurable
            g11, _ = klattice.to_groupoid(l1, l1)
            bad += not g11.is_unit
            if c(l1, l2) and c(l2, l3):
                g12, y12 = klattice.to_groupoid(l1, l2)
                g23, _ = klattice.to_groupoid(l2, l3)
                g13, y13 = klattice.to_groupoid(l1, l3)
                bad += g13 != g12 * g23 or y13 != y12
                if linked[0]:
                    bad += not klattice.arrow_consistent(l2, l1)
    return bad == 0, float(bad)


@check("lattice.invertible_Y0")
def _invertible(profile):
    bad = 0
    L = parse_level(Q, "12")
    Y0 = set(unit_points(L))
    for e in range(-1, 2):
        a = Ideal.from_factors({P: e for P in L.primes})
        m = klattice._lattice_modulus(L, a)
        for x in range(int(m.norm)):
            lat = klattice.make_lattice(Q, a, 1, x, L)
            bad += klattice.is_invertible(lat) != (klattice.y_point(lat) in Y0)
    return bad == 0, float(bad)


@check("lattice.scaling")
def _lscaling(profile):
    L = parse_level(Q, "12")
    rng = random.Random(41)
    bad = 0
    for _ in range(100):
        lat = klattice.random_lattice(L, rng)
        bad += klattice.scale_lattice(rng.uniform(0.1, 10), lat) != lat
        bad += klattice.scale_lattice(-1, klattice.scale_lattice(-1, lat)) != lat
        flipped = klattice.scale_lattice(-2.5, lat)
        bad += klattice.phi_tilde(flipped) != klattice.phi_tilde(lat) or flipped.sign != -lat.sign
    G = parse_level(GAUSS, "2^2,5^1")
    for _ in range(50):
        lat = klattice.random_lattice(G, rng)
        bad += klattice.scale_lattice(complex(rng.uniform(-3, 3), rng.uniform(0.1, 3)), lat) != lat
    try:
        klattice.scale_lattice(0, lat)
        bad += 1
    except ValidationError:
        pass
    return bad == 0, float(bad)


# ---------------------------------------------------------------------------
# runner

def select(profile: str, names: list[str] | None = None) -> list[Check]:
    if names:
        unknown = [n for n in names if n not in REGISTRY]
        if unknown:
            raise ValidationError(f"unknown check(s): {', '.join(unknown)}")
        return [REGISTRY[n] for n in names]
    return [c for c in REGISTRY.values() if profile == "full" or not c.full_only]


def run(profile: str = "quick", names: list[str] | None = None) -> list[CheckResult]:
    if profile not in ("quick", "full"):
        raise ValidationError(f"unknown profile {profile!r}")
    out = []
    for c in select(profile, names):
        t0 = time.perf_counter()
        try:
            passed, residual = c.fn(profile)
        except Exception as err:  # a crashing check is a failing check
            passed, residual = False, math.nan
            print(f"{c.name}: {type(err).__name__}: {err}")
        out.append(CheckResult(c.name, bool(passed), float(residual), time.perf_counter() - t0))
    return out


def report_csv(results: list[CheckResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "status", "residual"])
    for r in results:
        w.writerow([r.name, "pass" if r.passed else "fail", format(r.residual, ".17g")])
    return buf.getvalue()


def inject_fault(name: str, size: float = 1e-6) -> Callable[[], None]:
    """Perturb an internal formula; returns the function that undoes it."""
    if name != "local_mass":
        raise ValidationError(f"unknown fault {name!r}")
    orig = adelic._local_mass

    def perturbed(q, beta, j, k):
        return orig(q, beta, j, k) * (1 + size)

    adelic._local_mass = perturbed

    def undo():
        adelic._local_mass = orig
    return undo
