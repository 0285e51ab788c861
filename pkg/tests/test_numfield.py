import random

import pytest
from hypothesis import given, settings, strategies as st

from bcfields import oracles
from bcfields.errors import NonInvertibleError, UnsupportedFieldError, ValidationError
from bcfields.numfield import (
    Ideal,
    canonical_generator,
    elem_mul,
    elem_norm,
    element_ideal,
    enumerate_ideals,
    ideal_norm,
    kronecker,
    make_field,
    parse_field,
    primes_up_to_norm,
    rational_ideal,
    reduce_mod,
    residue_invert,
    split_prime,
)
from bcfields.zeta import primes_upto

Q = make_field("Q")
GAUSS = make_field("Q(sqrt-1)")
FIELDS = [GAUSS, make_field(5), make_field(-2), make_field(-3), make_field(-7), make_field(6), make_field(-163)]


def test_make_field_gaussian():
    F = make_field({"kind": "quadratic", "d": -1})
    assert (F.discriminant, F.w_K, F.cn1_imaginary) == (-4, 4, True)


def test_make_field_rational():
    F = make_field({"kind": "rational"})
    assert (F.discriminant, F.w_K) == (1, 2)


def test_make_field_real_quadratic():
    F = make_field({"kind": "quadratic", "d": 5})
    assert F.discriminant == 5 and not F.is_imaginary


@pytest.mark.parametrize("d", [0, 1, 4, -4, 12, "x"])
def test_make_field_rejects_bad_d(d):
    with pytest.raises(ValidationError):
        make_field({"kind": "quadratic", "d": d})


@pytest.mark.parametrize("text,d", [("Q(sqrt-1)", -1), ("Q(i)", -1), ("Q(sqrt5)", 5), ("Q(sqrt(-7))", -7)])
def test_parse_field_descriptors(text, d):
    assert parse_field(text).d == d


def test_parse_field_rejects_garbage():
    with pytest.raises(ValidationError):
        parse_field("R")


def test_gaussian_units_by_search():
    units = [(a, b) for a in range(-2, 3) for b in range(-2, 3) if elem_norm(GAUSS, (a, b)) == 1]
    assert len(units) == GAUSS.w_K


def test_split_five_in_gaussian():
    primes = split_prime(GAUSS, 5)
    assert len(primes) == 2
    assert {P.f for P in primes} == {1}
    assert {P.root for P in primes} == {r for r in range(5) if (r * r + 1) % 5 == 0}


def test_three_inert_in_gaussian():
    [P] = split_prime(GAUSS, 3)
    assert P.f == 2 and P.norm == 9 and not P.ramified


def test_two_ramified_in_gaussian():
    [P] = split_prime(GAUSS, 2)
    assert P.ramified and P.norm == 2


def test_split_prime_rejects_composite():
    with pytest.raises(ValidationError):
        split_prime(GAUSS, 15)


@pytest.mark.parametrize("F", FIELDS, ids=str)
def test_split_degrees_sum_to_two(F):
    for p in primes_upto(1000):
        assert sum((2 if P.ramified else 1) * P.f for P in split_prime(F, int(p))) == 2


@pytest.mark.parametrize("F", [f for f in FIELDS if f.d != -1], ids=str)
def test_split_type_matches_kronecker(F):
    for p in primes_upto(300):
        p = int(p)
        primes = split_prime(F, p)
        k = kronecker(F.discriminant, p)
        assert len(primes) == (2 if k == 1 else 1)
        assert primes[0].ramified == (k == 0)


def test_enumerate_rational():
    assert [int(a.norm) for a in enumerate_ideals(Q, 5)] == [1, 2, 3, 4, 5]


def test_enumerate_gaussian_ten():
    assert len(enumerate_ideals(GAUSS, 10)) == 9 == oracles.ideal_count(GAUSS, 10)


@pytest.mark.parametrize("F", FIELDS + [Q], ids=str)
def test_enumerate_bound_one(F):
    assert enumerate_ideals(F, 1) == [Ideal()]


@pytest.mark.parametrize("F", [GAUSS, make_field(-2), make_field(-3), make_field(-7)], ids=str)
def test_enumeration_against_lattice_points(F):
    from collections import Counter
    got = Counter(int(a.norm) for a in enumerate_ideals(F, 200))
    want = oracles.ideal_norm_counts(F, 200)
    assert all(got.get(n, 0) == want[n] for n in range(1, 201))


def test_enumeration_sorted_by_norm():
    norms = [a.norm for a in enumerate_ideals(GAUSS, 300)]
    assert norms == sorted(norms)


def test_ideal_norm_examples():
    [P2] = split_prime(GAUSS, 2)
    assert ideal_norm(GAUSS, Ideal()) == 1
    assert ideal_norm(GAUSS, Ideal.prime(P2, 2)) == 4
    assert ideal_norm(GAUSS, Ideal.prime(split_prime(GAUSS, 5)[0])) == 5


def test_rational_ideal_two_is_ramified_square():
    [P2] = split_prime(GAUSS, 2)
    assert rational_ideal(GAUSS, 2) == Ideal.prime(P2, 2)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_norm_multiplicative(data):
    F = data.draw(st.sampled_from([Q, GAUSS, make_field(5)]))
    primes = primes_up_to_norm(F, 60)
    exps = st.dictionaries(st.sampled_from(primes), st.integers(-3, 3), max_size=3)
    a = Ideal.from_factors(data.draw(exps))
    b = Ideal.from_factors(data.draw(exps))
    assert (a * b).norm == a.norm * b.norm
    assert (a / a).is_unit


def test_canonical_generator_split_five():
    P = next(P for P in split_prime(GAUSS, 5) if P.root == 2)
    g = canonical_generator(GAUSS, Ideal.prime(P))
    assert elem_norm(GAUSS, g) == 5
    assert g in {(2, 1), (1, -2), (-2, -1), (-1, 2), (2, -1), (1, 2), (-2, 1), (-1, -2)}
    assert element_ideal(GAUSS, g) == Ideal.prime(P)


def test_canonical_generator_unit_ideal():
    assert canonical_generator(GAUSS, Ideal()) == (1, 0)
    assert canonical_generator(Q, Ideal()) == (1, 0)


def test_canonical_generator_of_two_is_associate_of_square():
    g = canonical_generator(GAUSS, rational_ideal(GAUSS, 2))
    square = elem_mul(GAUSS, (1, 1), (1, 1))
    assert elem_norm(GAUSS, g) == 4
    assert element_ideal(GAUSS, g) == element_ideal(GAUSS, square)


@pytest.mark.parametrize("F", [make_field(-1), make_field(-2), make_field(-3), make_field(-7), make_field(-11)], ids=str)
def test_canonical_generator_generates(F):
    for a in enumerate_ideals(F, 60):
        assert element_ideal(F, canonical_generator(F, a)) == a


def test_canonical_generator_unsupported():
    F = make_field(-5)
    with pytest.raises(UnsupportedFieldError):
        canonical_generator(F, enumerate_ideals(F, 10)[1])


def test_reduce_and_invert_rational():
    r = reduce_mod(Q, 7, rational_ideal(Q, 4))
    assert r.to_int() == 3
    assert residue_invert(Q, r).to_int() == 3


def test_reduce_theta_at_split_prime():
    P = next(P for P in split_prime(GAUSS, 5) if P.root == 2)
    r = reduce_mod(GAUSS, (0, 1), Ideal.prime(P))
    assert r == reduce_mod(GAUSS, (2, 0), Ideal.prime(P))


def test_invert_non_unit_names_prime():
    [P2] = split_prime(GAUSS, 2)
    r = reduce_mod(GAUSS, (1, 1), Ideal.prime(P2))
    with pytest.raises(NonInvertibleError) as err:
        residue_invert(GAUSS, r)
    assert "P(2)" in str(err.value)


@settings(max_examples=300, deadline=None)
@given(x=st.tuples(st.integers(-10**4, 10**4), st.integers(-10**4, 10**4)),
       y=st.tuples(st.integers(-10**4, 10**4), st.integers(-10**4, 10**4)),
       lv=st.sampled_from([(GAUSS, 20), (GAUSS, 45), (make_field(-2), 24), (make_field(-3), 36), (make_field(5), 30)]))
def test_reduction_is_a_ring_homomorphism(x, y, lv):
    F, n = lv
    m = rational_ideal(F, n)
    rx, ry = reduce_mod(F, x, m), reduce_mod(F, y, m)
    assert rx * ry == reduce_mod(F, elem_mul(F, x, y), m)
    assert rx + ry == reduce_mod(F, (x[0] + y[0], x[1] + y[1]), m)


@settings(max_examples=300, deadline=None)
@given(x=st.integers(-10**6, 10**6), n=st.integers(2, 500))
def test_rational_reduction_is_mod_n(x, n):
    assert reduce_mod(Q, x, rational_ideal(Q, n)).to_int() == x % n


def test_invert_roundtrip():
    rng = random.Random(1)
    m = rational_ideal(GAUSS, 60)
    for _ in range(200):
        x = (rng.randint(-99, 99), rng.randint(-99, 99))
        r = reduce_mod(GAUSS, x, m)
        if r.is_unit():
            assert r * residue_invert(GAUSS, r) == reduce_mod(GAUSS, 1, m)
