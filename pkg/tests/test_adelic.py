import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from bcfields import adelic
from bcfields.adelic import (
    CylinderFunction,
    cylinder_measure,
    ideal_action,
    local_coset_measure,
    make_point,
    orbit_residues,
    parse_level,
    points,
    scaling_residual,
    set_measure,
    symmetry_action,
    unit_points,
    zero_fiber_set,
)
from bcfields.errors import DomainError, NEGATIVE_BETA_MESSAGE, UnsupportedFieldError, ValidationError
from bcfields.numfield import Ideal, enumerate_ideals, make_field, primes_up_to_norm, rational_ideal, split_prime

Q = make_field("Q")
GAUSS = make_field("Q(sqrt-1)")
P2 = split_prime(Q, 2)[0]
P3 = split_prime(Q, 3)[0]

MATRIX = [(Q, "2"), (Q, "12"), (Q, "2^2,3^1"), (Q, "8"), (Q, "2^3,3^2,5^1"),
          (GAUSS, "2^1"), (GAUSS, "2^2,5^1"), (GAUSS, "3^1,5:2^2"),
          (make_field(-3), "2^1,3^2"), (make_field(-2), "2^3,3^1"), (make_field(-7), "2^2,7^1")]
LEVEL_IDS = [f"{F}-{lv}" for F, lv in MATRIX]


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 3.7])
def test_unit_coset_mass(beta):
    assert abs(local_coset_measure(Q, P2, beta, (1, 1)) - (1 - 2 ** -beta)) <= 1e-15


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 3.7])
def test_zero_coset_mass(beta):
    assert abs(local_coset_measure(Q, P2, beta, (0, 1)) - 2 ** -beta) <= 1e-15


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_coset_three_mod_nine(beta):
    want = 3 ** -beta * (1 - 3 ** -beta) / 2
    assert abs(local_coset_measure(Q, P3, beta, (3, 2)) - want) <= 1e-15


def test_level_two_cylinders():
    L = parse_level(Q, "2")
    assert abs(cylinder_measure(L, 1.5, make_point(L, 1)) - (1 - 2 ** -1.5)) <= 1e-15
    assert cylinder_measure(L, 1.0, make_point(L, 0)) == pytest.approx(0.5, abs=1e-15)
    assert cylinder_measure(L, 1.0, make_point(L, 1)) == pytest.approx(0.5, abs=1e-15)


def test_normalization_example():
    L = parse_level(Q, "2^2,3^1")
    assert abs(set_measure(L, 1.7, points(L)) - 1) <= 1e-12


@pytest.mark.parametrize("F,lv", MATRIX, ids=LEVEL_IDS)
def test_beta_one_is_additive_haar(F, lv):
    L = parse_level(F, lv)
    n = int(L.ideal.norm)
    for y in points(L):
        assert abs(cylinder_measure(L, 1.0, y) - len(orbit_residues(y)) / n) <= 1e-14


@pytest.mark.parametrize("F,lv", MATRIX, ids=LEVEL_IDS)
def test_points_partition_the_residue_ring(F, lv):
    L = parse_level(F, lv)
    assert sum(len(orbit_residues(y)) for y in points(L)) == int(L.ideal.norm)


@settings(max_examples=60, deadline=None)
@given(beta=st.floats(0.05, 12.0), i=st.integers(0, len(MATRIX) - 1))
def test_normalization_property(beta, i):
    F, lv = MATRIX[i]
    L = parse_level(F, lv)
    assert abs(set_measure(L, beta, points(L)) - 1) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(beta=st.floats(0.1, 8.0), i=st.integers(0, 7))
def test_refinement_property(beta, i):
    F, lv = MATRIX[i]
    L = parse_level(F, lv)
    for P in primes_up_to_norm(F, 5):
        assert adelic.refinement_residual(L, beta, P) <= 1e-12


def test_ideal_action_rational():
    L = parse_level(Q, "12")
    assert ideal_action(L, rational_ideal(Q, 5), make_point(L, 3)) == make_point(L, 3)
    for y in points(L):
        assert ideal_action(L, Ideal(), y) == y


def test_ideal_action_gaussian_prime_lands_in_zero_fiber():
    P = split_prime(GAUSS, 5)[0]
    L = parse_level(GAUSS, f"5:{P.root}^1")
    one = make_point(L, 1)
    assert ideal_action(L, Ideal.prime(P), one) == make_point(L, 0)


def test_symmetry_examples():
    L = parse_level(Q, "12")
    assert symmetry_action(L, 5, make_point(L, 1)) == make_point(L, 5)
    for y in points(L):
        assert symmetry_action(L, 1, y) == y
    with pytest.raises(ValidationError):
        symmetry_action(L, 3, make_point(L, 1))


@pytest.mark.parametrize("F,lv", [(Q, "12"), (Q, "2^3,3^2"), (GAUSS, "2^2,5^1"), (make_field(-3), "2^1,3^2")])
def test_symmetry_transitive_on_units(F, lv):
    L = parse_level(F, lv)
    Y0 = unit_points(L)
    base = Y0[0]
    assert {symmetry_action(L, u.residue, base) for u in Y0} == set(Y0)


def test_symmetry_free_over_rationals():
    L = parse_level(Q, "12")
    Y0 = unit_points(L)
    for y in Y0:
        assert len({symmetry_action(L, u.residue, y) for u in Y0}) == len(Y0)


def test_symmetry_preserves_measure():
    L = parse_level(GAUSS, "2^2,5^1")
    rng = random.Random(2)
    units = unit_points(L)
    for y in points(L):
        u = rng.choice(units).residue
        assert abs(cylinder_measure(L, 1.3, symmetry_action(L, u, y)) - cylinder_measure(L, 1.3, y)) <= 1e-15


@pytest.mark.parametrize("k", range(5))
@pytest.mark.parametrize("beta", [0.5, 2.0])
def test_zero_fiber_mass(k, beta):
    L = parse_level(Q, "2^4,3^1")
    _, mass = zero_fiber_set(L, P2, k, beta)
    assert abs(mass - 2.0 ** (-k * beta)) <= 1e-14


def test_zero_fiber_depth_four_beta_two():
    _, mass = zero_fiber_set(parse_level(Q, "16"), P2, 4, 2.0)
    assert abs(mass - 2 ** -8) <= 1e-15


def test_zero_fiber_depth_zero_is_everything():
    L = parse_level(Q, "12")
    Z, mass = zero_fiber_set(L, P2, 0, 1.4)
    assert Z == frozenset(points(L)) and abs(mass - 1) <= 1e-14


def test_zero_fiber_gaussian_inert():
    L = parse_level(GAUSS, "3^2")
    [P] = split_prime(GAUSS, 3)
    _, mass = zero_fiber_set(L, P, 2, 1.5)
    assert abs(mass - 9.0 ** -3.0) <= 1e-15


def test_unit_ideal_scaling_is_zero():
    L = parse_level(Q, "12")
    assert scaling_residual(L, 1.5, Ideal(), points(L)[:4]) == 0


def test_scaling_examples():
    L = parse_level(Q, "2")
    assert scaling_residual(L, 1.5, rational_ideal(Q, 3), [make_point(L, 1)]) <= 1e-12
    P5 = split_prime(GAUSS, 5)[0]
    G = parse_level(GAUSS, f"5:{P5.root}^1")
    [Pg2] = split_prime(GAUSS, 2)
    assert scaling_residual(G, 2.0, Ideal.prime(Pg2), unit_points(G)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(beta=st.floats(0.2, 6.0), seed=st.integers(0, 10**6),
       case=st.sampled_from([(Q, "12"), (GAUSS, "2^1,5:2^1"), (make_field(-2), "2^2,3^1")]))
def test_scaling_property(beta, seed, case):
    F, lv = case
    L = parse_level(F, lv)
    rng = random.Random(seed)
    Z = rng.sample(points(L), rng.randint(1, len(points(L))))
    a = rng.choice(enumerate_ideals(F, 20))
    assert scaling_residual(L, beta, a, Z) <= 1e-12


@pytest.mark.parametrize("beta", [-0.5, -3.0])
def test_negative_beta_rejected(beta):
    L = parse_level(Q, "12")
    with pytest.raises(DomainError, match=NEGATIVE_BETA_MESSAGE):
        cylinder_measure(L, beta, points(L)[0])
    with pytest.raises(DomainError, match=NEGATIVE_BETA_MESSAGE):
        local_coset_measure(Q, P2, beta, (1, 1))


@pytest.mark.parametrize("beta", [0.0, math.nan])
def test_zero_and_nan_beta_rejected(beta):
    with pytest.raises(DomainError):
        local_coset_measure(Q, P2, beta, (1, 1))


def test_real_quadratic_unsupported():
    F = make_field(5)
    with pytest.raises(UnsupportedFieldError):
        points(parse_level(F, "2"))


@pytest.mark.parametrize("text", ["12", "2^2,3^1", "2^2, 3"])
def test_parse_level_forms(text):
    assert parse_level(Q, text).ideal == rational_ideal(Q, 12)


def test_parse_level_split_prime_root():
    L = parse_level(GAUSS, "5:2^1")
    [(P, k)] = L.ideal.factors
    assert P.root == 2 and k == 1


@pytest.mark.parametrize("text", ["", "0", "2^0", "x", "4^1"])
def test_parse_level_rejects(text):
    with pytest.raises(ValidationError):
        parse_level(Q, text)


def test_cylinder_function_projects_finer_points():
    L4, L12 = parse_level(Q, "4"), parse_level(Q, "12")
    f = CylinderFunction.from_function(L4, lambda y: float(y.residue.to_int()))
    for y in points(L12):
        assert f(y) == y.residue.to_int() % 4


def test_unit_indicator():
    L = parse_level(Q, "12")
    f = adelic.unit_indicator(L, P2)
    assert all(f(y) == (y.residue.to_int() % 2) for y in points(L))


def test_haar_weights_sum_to_one():
    for F, lv in MATRIX:
        w = adelic.haar_weights(parse_level(F, lv))
        assert abs(math.fsum(w.values()) - 1) <= 1e-15
