"""One-dimensional K-lattices at a finite working level.

A lattice is a class [(s, t)] with s a finite idele and t in O-hat, modulo
(s u^-1, u t) for u in O-hat^*.  At a level prime P we write
s_P = pi^e * sigma with pi the fixed uniformizer and sigma a local unit, so a
lattice is stored as (ideal of s, sigma, t) plus an archimedean sign over Q.
make_lattice takes s to be the generator of the ideal times a unit, embedded
diagonally, so sigma is the local unit part of that product.
The lifted map is phi~ = s t; commensurability is equality of phi~.

Data is truncated at the level; t and sigma are kept modulo P^(k - min(e, 0))
so that phi~ = pi^e sigma t is known modulo P^k even when e < 0.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .adelic import LevelSpec, YPoint, canonicalize, require_y_model
from .errors import DomainError, UnsupportedFieldError, ValidationError
from .numfield import (
    Element,
    FieldSpec,
    Ideal,
    PrimeIdeal,
    ResidueElement,
    as_element,
    canonical_generator,
    component_reps,
    divide_by_uniformizer,
    elem_mul,
    elem_pow,
    fractional_generator,
    in_prime_power,
    rational_ideal,
    reduce_component,
    residue_from_components,
    residue_invert,
    split_prime,
    uniformizer,
    valuation,
)


def _local_unit_part(F: FieldSpec, P: PrimeIdeal, x: Element, prec: int) -> tuple[int, Element]:
    """(v_P(x), x / pi^v modulo P^prec) for a nonzero exact element x."""
    v = valuation(F, P, x)
    y = x
    for i in range(v):
        y = divide_by_uniformizer(F, P, y, prec + v - i + 1)
    return v, reduce_component(F, P, prec, y)


def _invert_local(F: FieldSpec, P: PrimeIdeal, x: Element, prec: int) -> Element:
    m = Ideal.from_factors([(P, prec)])
    return residue_invert(F, residue_from_components(F, m, [x])).components[0]


def _precision(level: LevelSpec, ideal_part: Ideal, P: PrimeIdeal) -> int:
    return level.depth(P) - min(ideal_part.exponent(P), 0)


def _lattice_modulus(level: LevelSpec, ideal_part: Ideal) -> Ideal:
    return Ideal.from_factors([(P, _precision(level, ideal_part, P)) for P in level.primes])


@dataclass(frozen=True, eq=False)
class KLattice1:
    field: FieldSpec
    level: LevelSpec
    ideal_part: Ideal
    sign: int
    s_unit: ResidueElement
    t: ResidueElement

    def key(self):
        return (self.level, self.ideal_part, self.sign, phi_tilde(self))

    def __eq__(self, other) -> bool:
        return isinstance(other, KLattice1) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __str__(self) -> str:
        sign = "" if self.field.is_imaginary else ("+" if self.sign > 0 else "-")
        return f"[{sign}{self.ideal_part}; s={self.s_unit}; t={self.t}]"


def parse_ideal(F: FieldSpec, text: str) -> Ideal:
    """``"1/2"``, ``"6"``, or a product of ``p:r^e`` / ``p^e`` tokens joined by ``*``."""
    text = text.strip()
    try:
        return rational_ideal(F, Fraction(text))
    except (ValueError, ZeroDivisionError):
        pass
    acc: dict[PrimeIdeal, int] = {}
    for tok in text.split("*"):
        base, _, e = tok.strip().partition("^")
        try:
            e = int(e) if e else 1
            p, _, r = base.partition(":")
            primes = split_prime(F, int(p))
        except ValueError as err:
            raise ValidationError(f"bad ideal token {tok!r}") from err
        if r:
            primes = tuple(P for P in primes if P.root == int(r))
            if not primes:
                raise ValidationError(f"no prime above {p} with root {r}")
        elif len(primes) > 1:
            raise ValidationError(f"{p} splits; name the prime as {p}:root")
        acc[primes[0]] = acc.get(primes[0], 0) + e
    return Ideal.from_factors(acc)


def _as_ideal(F: FieldSpec, a) -> Ideal:
    if isinstance(a, Ideal):
        return a
    if isinstance(a, str):
        return parse_ideal(F, a)
    return rational_ideal(F, Fraction(a))


def _as_residue(F: FieldSpec, x, m: Ideal) -> ResidueElement:
    if isinstance(x, ResidueElement):
        have = dict(zip(x.modulus.support, x.components))
        return residue_from_components(F, m, [have.get(P, (0, 0)) for P, _ in m.factors])
    x = as_element(x)
    return residue_from_components(F, m, [x for _ in m.factors])


def make_lattice(F: FieldSpec, ideal_part, sign: int, t, level: LevelSpec, s_unit=1) -> KLattice1:
    """The lattice [(s, t)] with s = k * s_unit, k the canonical generator of ``ideal_part``.

    ``t`` and ``s_unit`` are elements of O or residues; residues are read
    through their representatives.
    """
    if level.field != F:
        raise ValidationError("level is over a different field")
    if not (F.is_rational or F.is_imaginary):
        raise UnsupportedFieldError(f"{F.label}: K-lattices are modelled for Q and imaginary quadratic fields")
    a = _as_ideal(F, ideal_part)
    outside = [P for P in a.support if level.depth(P) == 0]
    if outside:
        raise ValidationError(f"ideal part has support outside the level: {', '.join(map(str, outside))}")
    if sign not in (1, -1):
        raise ValidationError(f"sign must be +1 or -1, got {sign}")
    if F.is_imaginary and sign != 1:
        raise ValidationError("imaginary quadratic fields have no archimedean sign")
    m = _lattice_modulus(level, a)
    s = _as_residue(F, s_unit, m)
    if not s.is_unit():
        raise ValidationError("s_unit must be a unit at every level prime")
    num, den = fractional_generator(F, a)
    sig = []
    for P, prec in m.factors:
        _, nu = _local_unit_part(F, P, num, prec)
        _, de = _local_unit_part(F, P, den, prec)
        sig.append(elem_mul(F, elem_mul(F, nu, _invert_local(F, P, de, prec)), s.component(P)))
    return KLattice1(F, level, a, sign, residue_from_components(F, m, sig), _as_residue(F, t, m))


# ---------------------------------------------------------------------------
# the lifted map

@dataclass(frozen=True)
class PhiTilde:
    """Per level prime: (P, v, unit part mod P^(k - max(v, 0))), or (P, None, None) when v >= k."""
    components: tuple[tuple[PrimeIdeal, int | None, Element | None], ...]

    def valuation(self, P: PrimeIdeal) -> int | None:
        for Q, v, _ in self.components:
            if Q == P:
                return v
        raise KeyError(P)

    def __str__(self) -> str:
        parts = []
        for P, v, u in self.components:
            parts.append(f"{P}: 0" if v is None else f"{P}: v={v} u={u}")
        return "{" + ", ".join(parts) + "}"


def phi_tilde(lat: KLattice1, sign: int = 1) -> PhiTilde:
    """The truncation of s t (times ``sign``) at the level."""
    F = lat.field
    out = []
    for (P, prec), c, sig in zip(lat.t.modulus.factors, lat.t.components, lat.s_unit.components):
        k = lat.level.depth(P)
        e = lat.ideal_part.exponent(P)
        j = valuation(F, P, c, cap=prec)
        v = e + j
        if v >= k:
            out.append((P, None, None))
            continue
        tau = c
        for i in range(j):
            tau = divide_by_uniformizer(F, P, tau, prec - i)
        keep = k - max(v, 0)
        u = elem_mul(F, elem_mul(F, sig, tau), (sign, 0))
        out.append((P, v, reduce_component(F, P, keep, u)))
    return PhiTilde(tuple(out))


def commensurable(lat1: KLattice1, lat2: KLattice1) -> bool:
    """phi~_1 = phi~_2 at the common level (the archimedean sign included)."""
    if lat1.level != lat2.level:
        raise ValidationError("lattices carried at different levels")
    return phi_tilde(lat1, lat1.sign) == phi_tilde(lat2, lat2.sign)


def scale_lattice(k, lat: KLattice1) -> KLattice1:
    """Scaling by k in K_oo^*, modulo its identity component."""
    if k == 0:
        raise ValidationError("cannot scale by 0")
    if lat.field.is_rational:
        if isinstance(k, complex):
            raise ValidationError("scaling over Q needs a real number")
        if k < 0:
            return KLattice1(lat.field, lat.level, lat.ideal_part, -lat.sign, lat.s_unit, lat.t)
    return lat


def balance(lat: KLattice1, u) -> KLattice1:
    """(s, t) -> (s u, u^-1 t) for a unit u of O (or of the lattice residue ring)."""
    F = lat.field
    m = lat.t.modulus
    ur = _as_residue(F, u, m)
    if not ur.is_unit():
        raise ValidationError("balancing needs a unit")
    return KLattice1(F, lat.level, lat.ideal_part, lat.sign, lat.s_unit * ur, lat.t * residue_invert(F, ur))


def transport(lat: KLattice1, g) -> KLattice1:
    """The lattice [(s g^-1, g t)] for an integral ideal g supported on the level.

    It is commensurable with ``lat`` and to_groupoid(result, lat) has coordinate g.
    """
    F = lat.field
    require_y_model(F)
    g = _as_ideal(F, g)
    if not (g.is_integral or g.is_unit):
        raise ValidationError("transport needs an integral ideal")
    if any(lat.level.depth(P) == 0 for P in g.support):
        raise ValidationError("transport ideal must be supported on the level")
    gen = canonical_generator(F, g)
    a = lat.ideal_part / g
    m = _lattice_modulus(lat.level, a)
    sig, tt = [], []
    for P, prec in m.factors:
        _, eta = _local_unit_part(F, P, gen, prec)
        sig.append(elem_mul(F, lat.s_unit.component(P), _invert_local(F, P, eta, prec)))
        tt.append(elem_mul(F, lat.t.component(P), gen))
    return KLattice1(F, lat.level, a, lat.sign,
                     residue_from_components(F, m, sig), residue_from_components(F, m, tt))


# ---------------------------------------------------------------------------
# groupoid coordinates

def y_point(lat: KLattice1) -> YPoint:
    """The point sign * s t / k of Y at the level, k the generator of the ideal of s."""
    F = lat.field
    require_y_model(F)
    num, den = fractional_generator(F, lat.ideal_part)
    m = lat.level.ideal
    comps = []
    for P, k in m.factors:
        _, nu = _local_unit_part(F, P, num, k)
        _, de = _local_unit_part(F, P, den, k)
        eps = elem_mul(F, de, _invert_local(F, P, nu, k))
        x = elem_mul(F, elem_mul(F, eps, lat.s_unit.component(P)), lat.t.component(P))
        comps.append(elem_mul(F, x, (lat.sign, 0)))
    return canonicalize(residue_from_components(F, m, comps))


def to_groupoid(lat1: KLattice1, lat2: KLattice1) -> tuple[Ideal, YPoint]:
    """The arrow between commensurable lattices: (ideal(lat1)^-1 ideal(lat2), y of lat1)."""
    require_y_model(lat1.field)
    if not commensurable(lat1, lat2):
        raise DomainError("lattices are not commensurable")
    return lat1.ideal_part.inverse() * lat2.ideal_part, y_point(lat1)


def arrow_consistent(lat1: KLattice1, lat2: KLattice1) -> bool:
    """den(g) y_1 == num(g) y_2 up to units, g the arrow coordinate."""
    g, y1 = to_groupoid(lat1, lat2)
    y2 = y_point(lat2)
    num, den = fractional_generator(lat1.field, g)
    return canonicalize(y1.residue.scale(den)) == canonicalize(y2.residue.scale(num))


def is_invertible(lat: KLattice1) -> bool:
    """t is a unit at every level prime."""
    F = lat.field
    return all(not in_prime_power(F, P, 1, c) for (P, _), c in zip(lat.t.modulus.factors, lat.t.components))


def random_lattice(level: LevelSpec, rng: random.Random, emin: int = -2, emax: int = 2,
                   zero_bias: float = 0.2) -> KLattice1:
    """A random lattice at the level; t lands in deep powers of P with probability zero_bias."""
    F = level.field
    exps = {P: rng.randint(emin, emax) for P in level.primes}
    a = Ideal.from_factors(exps)
    m = _lattice_modulus(level, a)
    t, s = [], []
    for P, prec in m.factors:
        reps = component_reps(F, P, prec)
        x = rng.choice(reps)
        if rng.random() < zero_bias:
            x = reduce_component(F, P, prec, elem_mul(F, x, _pi_power(F, P, rng.randint(1, prec))))
        t.append(x)
        s.append(rng.choice([r for r in reps if not in_prime_power(F, P, 1, r)]))
    sign = rng.choice((1, -1)) if F.is_rational else 1
    return KLattice1(F, level, a, sign, residue_from_components(F, m, s), residue_from_components(F, m, t))


def _pi_power(F: FieldSpec, P: PrimeIdeal, n: int) -> Element:
    return elem_pow(F, uniformizer(F, P), n)
