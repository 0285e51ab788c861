"""Finite levels of Y = Gal(K^ab/K) x_{O^*} O-hat and the measures mu_beta.

For K = Q we use Y = Z-hat; for imaginary quadratic fields of class number
one Y = O-hat / O^*.  A level is an integral ideal m; the level-m shadow of
Y is O/m (Q) or O/m modulo the roots of unity (imaginary quadratic).  A
YPoint stores the orbit's canonical representative.

The measure mu_beta is the push-forward of the product of the local
measures mu_{beta,v}; the mass of a level cylinder has a closed form, so
nothing here is truncated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Mapping

from .errors import DomainError, NEGATIVE_BETA_MESSAGE, UnsupportedFieldError, ValidationError
from .numfield import (
    Element,
    FieldSpec,
    Ideal,
    PrimeIdeal,
    ResidueElement,
    as_element,
    canonical_generator,
    component_reps,
    elem_mul,
    factor_int,
    in_prime_power,
    project_residue,
    reduce_component,
    reduce_mod,
    residue_from_components,
    split_prime,
    unit_roots,
    valuation,
)


def check_beta(beta: float) -> float:
    beta = float(beta)
    if beta < 0:
        raise DomainError(f"{NEGATIVE_BETA_MESSAGE} (got beta = {beta})")
    if beta == 0 or math.isnan(beta):
        raise DomainError(f"beta must be positive (got beta = {beta})")
    return beta


def require_y_model(F: FieldSpec) -> None:
    if not (F.is_rational or F.cn1_imaginary):
        raise UnsupportedFieldError(
            f"{F.label}: the finite-level model of Y is only available for Q and "
            "imaginary quadratic fields of class number one"
        )


# ---------------------------------------------------------------------------
# levels and points

@dataclass(frozen=True)
class LevelSpec:
    field: FieldSpec
    modulus: tuple[tuple[PrimeIdeal, int], ...]

    def __post_init__(self):
        seen = set()
        for P, k in self.modulus:
            if k < 1:
                raise ValidationError(f"depth must be >= 1, got {k} at {P}")
            if P in seen:
                raise ValidationError(f"prime {P} repeated in level")
            seen.add(P)

    @property
    def ideal(self) -> Ideal:
        return Ideal.from_factors(self.modulus)

    @property
    def primes(self) -> tuple[PrimeIdeal, ...]:
        return tuple(P for P, _ in self.modulus)

    @property
    def size(self) -> int:
        return int(self.ideal.norm)

    def depth(self, P: PrimeIdeal) -> int:
        for Q, k in self.modulus:
            if Q == P:
                return k
        return 0

    def __str__(self) -> str:
        return ",".join(f"{P}^{k}" for P, k in self.ideal.factors) or "1"


def level_from_ideal(F: FieldSpec, m: Ideal) -> LevelSpec:
    if not m.is_integral and not m.is_unit:
        raise ValidationError("a level must be an integral ideal")
    return LevelSpec(F, m.factors)


def make_level(F: FieldSpec, items: Iterable[tuple[PrimeIdeal, int]] | Mapping) -> LevelSpec:
    pairs = list(items.items()) if isinstance(items, Mapping) else list(items)
    for P, k in pairs:
        if k < 1:
            raise ValidationError(f"level depth must be >= 1, got {k} at {P}")
        if P not in split_prime(F, P.p):
            raise ValidationError(f"{P} is not a prime of {F.label}")
    return level_from_ideal(F, Ideal.from_factors(pairs))


def parse_level(F: FieldSpec, text: str) -> LevelSpec:
    """Parse ``"12"`` (the ideal (12)), ``"2^2,3^1"`` or ``"5:2^1"``.

    A token ``p^k`` means every prime above p to depth k (for a ramified
    prime the depth is taken in that prime); ``p:r^k`` picks the split prime
    above p whose root is r.
    """
    text = text.strip()
    if not text:
        raise ValidationError("empty level")
    acc: dict[PrimeIdeal, int] = {}
    if text.isdigit():
        for p, e in factor_int(int(text)).items():
            for P in split_prime(F, p):
                acc[P] = e * (2 if P.ramified else 1)
        return level_from_ideal(F, Ideal.from_factors(acc))
    for tok in text.split(","):
        tok = tok.strip()
        base, _, k = tok.partition("^")
        try:
            k = int(k) if k else 1
            p, _, r = base.partition(":")
            primes = split_prime(F, int(p))
        except ValueError as err:
            raise ValidationError(f"bad level token {tok!r}") from err
        if k < 1:
            raise ValidationError(f"level depth must be >= 1 in {tok!r}")
        if r:
            primes = tuple(P for P in primes if P.root == int(r))
            if not primes:
                raise ValidationError(f"no prime above {p} with root {r}")
        for P in primes:
            acc[P] = k
    return level_from_ideal(F, Ideal.from_factors(acc))


@dataclass(frozen=True, order=False)
class YPoint:
    residue: ResidueElement

    @property
    def level_ideal(self) -> Ideal:
        return self.residue.modulus

    @property
    def key(self):
        return self.residue.components

    def is_unit(self) -> bool:
        return self.residue.is_unit()

    def __lt__(self, other: "YPoint") -> bool:
        return self.key < other.key

    @property
    def label(self) -> str:
        return str(self.residue)

    def __str__(self) -> str:
        return self.label


def _orbit(r: ResidueElement) -> frozenset[ResidueElement]:
    F = r.field
    if F.is_rational:
        return frozenset((r,))
    return frozenset(r.scale(u) for u in unit_roots(F))


def canonicalize(r: ResidueElement) -> YPoint:
    F = r.field
    require_y_model(F)
    if F.is_rational:
        return YPoint(r)
    return YPoint(min(_orbit(r), key=lambda s: s.components))


def orbit_residues(y: YPoint) -> frozenset[ResidueElement]:
    return _orbit(y.residue)


def make_point(level: LevelSpec, x) -> YPoint:
    """The level point of an element x of O (int or (a, b))."""
    require_y_model(level.field)
    return canonicalize(reduce_mod(level.field, as_element(x), level.ideal))


@lru_cache(maxsize=64)
def points(level: LevelSpec) -> tuple[YPoint, ...]:
    """All points of the level, sorted by canonical representative."""
    F = level.field
    require_y_model(F)
    m = level.ideal
    reps = [component_reps(F, P, k) for P, k in m.factors]
    seen = set()
    for comps in product(*reps):
        seen.add(canonicalize(ResidueElement(F, m, tuple(comps))))
    return tuple(sorted(seen))


@lru_cache(maxsize=64)
def unit_points(level: LevelSpec) -> tuple[YPoint, ...]:
    """The invertible points, the level shadow of Y_0."""
    return tuple(y for y in points(level) if y.is_unit())


def project_point(y: YPoint, level: LevelSpec) -> YPoint:
    """Image of y at a coarser level."""
    if y.level_ideal == level.ideal:
        return y
    return canonicalize(project_residue(y.residue, level.ideal))


def haar_weights(level: LevelSpec) -> dict[YPoint, float]:
    """Push-forward of normalized Haar measure on O-hat^* to the unit points."""
    pts = unit_points(level)
    sizes = {y: len(orbit_residues(y)) for y in pts}
    total = sum(sizes.values())
    return {y: s / total for y, s in sizes.items()}


# ---------------------------------------------------------------------------
# measures

def _local_mass(q: int, beta: float, j: int, k: int) -> float:
    """mu_beta of a coset x + p^k O_v where x has valuation j (j == k: x = 0)."""
    if j >= k:
        return q ** (-k * beta)
    return q ** (-j * beta) * (1.0 - q ** (-beta)) / ((q - 1) * q ** (k - j - 1))


def local_coset_measure(F: FieldSpec, P: PrimeIdeal, beta: float, coset: tuple) -> float:
    """mu_{beta,v}(x + P^k O_v) for ``coset = (x, k)``."""
    beta = check_beta(beta)
    x, k = coset
    x = as_element(x)
    if k == 0:
        return 1.0
    j = valuation(F, P, reduce_component(F, P, k, x), cap=k)
    return _local_mass(P.norm, beta, j, k)


@lru_cache(maxsize=200_000)
def _component_valuation(F: FieldSpec, P: PrimeIdeal, k: int, c: Element) -> int:
    return valuation(F, P, c, cap=k)


def residue_mass(beta: float, r: ResidueElement) -> float:
    F = r.field
    out = 1.0
    for (P, k), c in zip(r.modulus.factors, r.components):
        out *= _local_mass(P.norm, beta, _component_valuation(F, P, k, c), k)
    return out


def cylinder_measure(level: LevelSpec, beta: float, y: YPoint) -> float:
    """mu_beta of the level cylinder of y (summed over its unit orbit)."""
    beta = check_beta(beta)
    require_y_model(level.field)
    return math.fsum(residue_mass(beta, r) for r in orbit_residues(y))


def set_measure(level: LevelSpec, beta: float, Z: Iterable[YPoint]) -> float:
    beta = check_beta(beta)
    return math.fsum(cylinder_measure(level, beta, y) for y in set(Z))


def measure_table(level: LevelSpec, beta: float) -> dict[YPoint, float]:
    return {y: cylinder_measure(level, beta, y) for y in points(level)}


# ---------------------------------------------------------------------------
# cylinder functions

@dataclass(frozen=True)
class CylinderFunction:
    level: LevelSpec
    values: Mapping[YPoint, complex] = field(default_factory=dict)

    def __call__(self, y: YPoint) -> complex:
        if y.level_ideal != self.level.ideal:
            y = project_point(y, self.level)
        return self.values.get(y, 0.0)

    @classmethod
    def from_function(cls, level: LevelSpec, fn: Callable[[YPoint], complex]) -> "CylinderFunction":
        return cls(level, {y: fn(y) for y in points(level)})

    @classmethod
    def constant(cls, level: LevelSpec, c: complex = 1.0) -> "CylinderFunction":
        return cls.from_function(level, lambda y: c)

    @classmethod
    def indicator(cls, level: LevelSpec, Z: Iterable[YPoint]) -> "CylinderFunction":
        return cls(level, {y: 1.0 for y in Z})

    def sup_norm(self) -> float:
        return max((abs(v) for v in self.values.values()), default=0.0)

    def table(self) -> list[tuple[YPoint, complex]]:
        return [(y, self(y)) for y in points(self.level)]


def unit_indicator(level: LevelSpec, P: PrimeIdeal) -> CylinderFunction:
    """Indicator of points that are units at P."""
    F = level.field
    k = level.depth(P)
    if k == 0:
        raise ValidationError(f"{P} is not a level prime")
    return CylinderFunction.from_function(
        level, lambda y: 0.0 if in_prime_power(F, P, 1, y.residue.component(P)) else 1.0)


# ---------------------------------------------------------------------------
# actions

def refine(level: LevelSpec, a: Ideal) -> LevelSpec:
    """The level m*a."""
    if not (a.is_integral or a.is_unit):
        raise ValidationError("refinement needs an integral ideal")
    return level_from_ideal(level.field, level.ideal * a)


def generator_residue(level: LevelSpec, a: Ideal) -> ResidueElement:
    require_y_model(level.field)
    return reduce_mod(level.field, canonical_generator(level.field, a), level.ideal)


def ideal_action(level: LevelSpec, a: Ideal, y: YPoint) -> YPoint:
    """The point a*y at the same level (multiplication by the canonical generator)."""
    require_y_model(level.field)
    g = canonical_generator(level.field, a)
    return canonicalize(y.residue.scale(g))


def image_point(level: LevelSpec, a: Ideal, y: YPoint) -> tuple[LevelSpec, YPoint]:
    """The cylinder a*(level cylinder of y), a single cylinder at level m*a."""
    F = level.field
    require_y_model(F)
    g = canonical_generator(F, a)
    fine = refine(level, a)
    have = dict(zip(y.residue.modulus.support, y.residue.components))
    comps = []
    for P, k in fine.modulus:
        c = have.get(P)
        comps.append(elem_mul(F, c, g) if c is not None else (0, 0))
    return fine, canonicalize(residue_from_components(F, fine.ideal, comps))


def image_set(level: LevelSpec, a: Ideal, Z: Iterable[YPoint]) -> tuple[LevelSpec, frozenset[YPoint]]:
    fine = refine(level, a)
    return fine, frozenset(image_point(level, a, y)[1] for y in Z)


def symmetry_action(level: LevelSpec, u, y: YPoint) -> YPoint:
    """Multiply y by a unit u of O/m (the Galois symmetry on the O-hat model)."""
    F = level.field
    require_y_model(F)
    if not isinstance(u, ResidueElement):
        u = reduce_mod(F, as_element(u), level.ideal)
    if not u.is_unit():
        raise ValidationError(f"symmetry action needs a unit, got {u}")
    return canonicalize(y.residue * u)


def zero_fiber_set(level: LevelSpec, P: PrimeIdeal, k: int, beta: float | None = None):
    """Points whose P-component lies in P^k, and their mu_beta mass."""
    F = level.field
    if k > level.depth(P):
        raise ValidationError(f"depth {k} exceeds the level depth at {P}")
    if k == 0:
        Z = frozenset(points(level))
    else:
        Z = frozenset(y for y in points(level) if in_prime_power(F, P, k, y.residue.component(P)))
    mass = None if beta is None else set_measure(level, beta, Z)
    return Z, mass


def scaling_residual(level: LevelSpec, beta: float, a: Ideal, Z: Iterable[YPoint]) -> float:
    """|mu(aZ) - N(a)^-beta mu(Z)| with aZ evaluated at the level m*a."""
    beta = check_beta(beta)
    Z = frozenset(Z)
    fine, image = image_set(level, a, Z)
    lhs = set_measure(fine, beta, image)
    rhs = float(a.norm) ** (-beta) * set_measure(level, beta, Z)
    return abs(lhs - rhs)


def refinement_residual(level: LevelSpec, beta: float, P: PrimeIdeal) -> float:
    """max over level points of |mu(cylinder) - sum of masses of its m*P refinements|."""
    fine = refine(level, Ideal.prime(P))
    buckets: dict[YPoint, list[float]] = {}
    for z in points(fine):
        buckets.setdefault(project_point(z, level), []).append(cylinder_measure(fine, beta, z))
    return max(abs(cylinder_measure(level, beta, y) - math.fsum(buckets.get(y, [])))
               for y in points(level))
