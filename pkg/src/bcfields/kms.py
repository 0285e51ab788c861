"""KMS_beta states on the finite-level models, their verification, and diagnostics.

Every state here factors through the conditional expectation onto
functions: a monomial f u_a with a != (1) evaluates to exactly zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .adelic import (
    CylinderFunction,
    LevelSpec,
    YPoint,
    canonicalize,
    check_beta,
    cylinder_measure,
    haar_weights,
    ideal_action,
    image_point,
    level_from_ideal,
    points,
    project_point,
    refine,
    require_y_model,
    unit_points,
)
from .errors import DomainError, UnsupportedFieldError, ValidationError
from .numfield import (
    FieldSpec,
    Ideal,
    PrimeIdeal,
    ResidueElement,
    canonical_generator,
    elem_norm,
    extend_residue,
    factor_int,
    in_prime_power,
    primes_up_to_norm,
    reduce_mod,
    residue_one,
    split_prime,
)
from .zeta import (
    Character,
    conductor_primes,
    euler_ratio,
    euler_ratio_scan,
    zeta_euler_smooth,
    zeta_partial,
    zeta_tail_bound,
)

EPS = 2.0 ** -52
# allowance for rounding in sums that are exact in exact arithmetic
ROUNDING = 64 * EPS


def level_lcm(a: LevelSpec, b: LevelSpec) -> LevelSpec:
    if a.field != b.field:
        raise ValidationError("levels over different fields")
    depth = dict(a.modulus)
    for P, k in b.modulus:
        depth[P] = max(depth.get(P, 0), k)
    return level_from_ideal(a.field, Ideal.from_factors(depth))


def lift_point(y: YPoint, level: LevelSpec) -> YPoint:
    """A point of ``level`` over y; new and deeper components keep y's representatives."""
    if y.level_ideal == level.ideal:
        return y
    r = extend_residue(y.residue, level.ideal)
    return canonicalize(r)


def point_at(y: YPoint, level: LevelSpec) -> YPoint:
    """y moved to ``level``: projected if coarser, otherwise lifted then projected."""
    big = level_lcm(level_from_ideal(level.field, y.level_ideal), level)
    return project_point(lift_point(y, big), level)


def _sum_complex(vals: Iterable[complex]) -> complex:
    vals = list(vals)
    return complex(math.fsum(v.real for v in map(complex, vals)),
                   math.fsum(v.imag for v in map(complex, vals)))


def _clean(z: complex) -> complex | float:
    z = complex(z)
    return z.real if z.imag == 0 else z


# ---------------------------------------------------------------------------
# ideal classes modulo a level

@lru_cache(maxsize=32)
def ideal_residue_classes(F: FieldSpec, m: Ideal, B: int) -> dict[ResidueElement, np.ndarray]:
    """Norms of the integral ideals with N <= B, grouped by generator residue mod m.

    Generators are only fixed up to units; callers canonicalize after
    multiplying, which absorbs that ambiguity.
    """
    require_y_model(F)
    B = int(B)
    if F.is_rational:
        M = int(m.norm)
        n = np.arange(1, B + 1, dtype=np.int64)
        out = {}
        for r in range(M):
            sl = n[(r - 1) % M::M] if M > 1 else n
            if sl.size:
                key = reduce_mod(F, r, m)
                out[key] = np.concatenate([out[key], sl]) if key in out else sl
        return out

    primes = primes_up_to_norm(F, B)
    gens = [reduce_mod(F, canonical_generator(F, Ideal.prime(P)), m) for P in primes]
    acc: dict[ResidueElement, list[int]] = {}

    def rec(i: int, norm: int, r: ResidueElement):
        acc.setdefault(r, []).append(norm)
        for j in range(i, len(primes)):
            q = primes[j].norm
            if norm * q > B:
                break
            n2, r2 = norm * q, r * gens[j]
            while n2 <= B:
                rec(j + 1, n2, r2)
                n2 *= q
                r2 = r2 * gens[j]

    rec(0, 1, residue_one(F, m))
    return {k: np.sort(np.asarray(v, dtype=np.int64)) for k, v in acc.items()}


@lru_cache(maxsize=64)
def ideal_class_weights(F: FieldSpec, m: Ideal, beta: float, B: int) -> tuple[tuple[ResidueElement, float], ...]:
    """(residue, sum of N(a)^-beta over ideals with that generator residue)."""
    classes = ideal_residue_classes(F, m, B)
    out = []
    for r, norms in classes.items():
        out.append((r, math.fsum((norms.astype(np.float64) ** (-beta)).tolist())))
    return tuple(out)


# ---------------------------------------------------------------------------
# states

KINDS = ("extremal", "subcritical", "barycenter", "ground")


@dataclass(frozen=True)
class StateHandle:
    kind: str
    field: FieldSpec
    beta: float
    level: LevelSpec
    w: YPoint | None = None
    nu: tuple[tuple[YPoint, float], ...] = ()
    bound: int | None = None

    def __call__(self, f: CylinderFunction) -> complex | float:
        return self.evaluate(f)[0]

    def evaluate(self, f: CylinderFunction) -> tuple[complex | float, float]:
        """(value, tail bound)."""
        if self.kind == "ground":
            return _clean(f(point_at(self.w, f.level))), 0.0
        if self.kind == "subcritical":
            return product_measure_eval(f, self.beta), ROUNDING * (1 + f.sup_norm())
        pts = [w for w, _ in self.nu] if self.kind == "barycenter" else [self.w]
        wts = [p for _, p in self.nu] if self.kind == "barycenter" else [1.0]
        vals, tail = _extremal_values(self.field, self.beta, pts, f, self.bound)
        return _clean(_sum_complex(p * v for p, v in zip(wts, vals))), tail

    def zeta(self) -> float:
        return zeta_euler_smooth(self.field, self.beta, self.bound)


def _check_unit_point(level: LevelSpec, w: YPoint) -> YPoint:
    if w.level_ideal != level.ideal:
        w = point_at(w, level)
    if not w.is_unit():
        raise ValidationError(f"{w} is not invertible at level {level}")
    return w


def extremal_state(level: LevelSpec, beta: float, w: YPoint, B: int) -> StateHandle:
    beta = check_beta(beta)
    if beta <= 1:
        raise DomainError(f"extremal states need beta > 1 (got {beta}); use subcritical_state")
    require_y_model(level.field)
    return StateHandle("extremal", level.field, beta, level, _check_unit_point(level, w), bound=int(B))


def subcritical_state(level: LevelSpec, beta: float) -> StateHandle:
    beta = check_beta(beta)
    if beta > 1:
        raise DomainError(f"the subcritical state needs 0 < beta <= 1 (got {beta})")
    require_y_model(level.field)
    return StateHandle("subcritical", level.field, beta, level)


def ground_state(level: LevelSpec, w: YPoint) -> StateHandle:
    require_y_model(level.field)
    return StateHandle("ground", level.field, math.inf, level, _check_unit_point(level, w))


def barycenter_state(level: LevelSpec, beta: float, nu: Mapping[YPoint, float], B: int) -> StateHandle:
    beta = check_beta(beta)
    if beta <= 1:
        raise DomainError(f"barycenters of extremal states need beta > 1 (got {beta})")
    require_y_model(level.field)
    items = []
    for w, p in nu.items():
        if p < 0:
            raise ValidationError(f"negative weight {p} at {w}")
        items.append((_check_unit_point(level, w), float(p)))
    total = math.fsum(p for _, p in items)
    if abs(total - 1.0) > 1e-12:
        raise ValidationError(f"weights must sum to 1 (got {total!r})")
    items.sort(key=lambda t: t[0].key)
    return StateHandle("barycenter", level.field, beta, level, nu=tuple(items), bound=int(B))


def _extremal_values(F: FieldSpec, beta: float, ws: Sequence[YPoint], f: CylinderFunction,
                     B: int) -> tuple[list[complex], float]:
    lv = f.level
    wts = ideal_class_weights(F, lv.ideal, beta, int(B))
    zeta = zeta_euler_smooth(F, beta, int(B))
    vals = []
    for w in ws:
        wl = point_at(w, lv)
        vals.append(_sum_complex(c * f(canonicalize(wl.residue * r)) for r, c in wts) / zeta)
    tb = zeta_tail_bound(F, beta, int(B)).bound
    sup = f.sup_norm()
    return vals, 2.0 * sup * tb / zeta + ROUNDING * (1 + sup)


def extremal_state_eval(F: FieldSpec, beta: float, w: YPoint, f: CylinderFunction,
                        B: int) -> tuple[complex | float, float]:
    """zeta(beta)^-1 sum_{N(a) <= B} N(a)^-beta f(a w) and its tail bound."""
    if F != f.level.field:
        raise ValidationError("field mismatch")
    return extremal_state(f.level, beta, w, B).evaluate(f)


def product_measure_eval(f: CylinderFunction, beta: float) -> complex | float:
    """Integral of f against the product measure mu_beta (exact cylinder masses)."""
    beta = check_beta(beta)
    lv = f.level
    return _clean(_sum_complex(cylinder_measure(lv, beta, y) * f(y) for y in points(lv)))


def subcritical_state_eval(F: FieldSpec, beta: float, f: CylinderFunction) -> complex | float:
    if F != f.level.field:
        raise ValidationError("field mismatch")
    return subcritical_state(f.level, beta)(f)


def ground_state_eval(w: YPoint, f: CylinderFunction) -> complex | float:
    return ground_state(f.level, w)(f)


def state_from_Y0_measure(F: FieldSpec, beta: float, nu: Mapping[YPoint, float],
                          f: CylinderFunction, B: int) -> complex | float:
    """Barycenter of extremal states with weights nu on the invertible points."""
    if F != f.level.field:
        raise ValidationError("field mismatch")
    return barycenter_state(f.level, beta, nu, B)(f)


def uniform_Y0_measure(level: LevelSpec) -> dict[YPoint, float]:
    """Haar measure on the invertible points (orbit sizes can differ at small levels)."""
    return haar_weights(level)


# ---------------------------------------------------------------------------
# monomials and the KMS condition

@dataclass(frozen=True)
class Monomial:
    """f u_a, or its adjoint u_a^* f-bar when ``adjoint``."""
    f: CylinderFunction
    ideal: Ideal
    adjoint: bool = False

    def star(self) -> "Monomial":
        g = CylinderFunction(self.f.level, {y: complex(v).conjugate() for y, v in self.f.values.items()})
        return Monomial(g, self.ideal, not self.adjoint)


def monomial_eval(state: StateHandle, x: Monomial) -> complex | float:
    """phi(f u_a): zero unless a = (1)."""
    if not x.ideal.is_unit:
        return 0.0
    return state(x.f)


@dataclass(frozen=True)
class ResidualReport:
    residual: float
    tail: float
    diagonal: bool

    @property
    def ok(self) -> bool:
        return self.residual <= self.tail


def _products(level: LevelSpec, a: Ideal, f: CylinderFunction, g: CylinderFunction):
    """The functions behind f u_a . g u_a^* and g u_a^* . f u_a."""
    fine = refine(level, a)
    h1 = {}
    for y in points(level):
        z = image_point(level, a, y)[1]
        h1[z] = complex(f(project_point(z, level))) * complex(g(y))
    h2 = {y: complex(g(y)) * complex(f(ideal_action(level, a, y))) for y in points(level)}
    return CylinderFunction(fine, h1), CylinderFunction(level, h2)


def kms_residual(state: StateHandle, x: Monomial, y: Monomial) -> ResidualReport:
    """|phi(xy) - N(a)^-beta phi(yx)| for x = f u_a, y = g u_a^*, with its allowed tail.

    Products with nonzero grading are checked instead for phi(xy) = 0.
    """
    if state.kind == "ground":
        raise ValidationError("the KMS condition is checked for finite beta only")
    if x.ideal != y.ideal or x.adjoint == y.adjoint:
        return ResidualReport(0.0, 0.0, False)
    flip = x.adjoint
    if flip:
        x, y = y, x
    a = x.ideal
    if not (a.is_integral or a.is_unit):
        raise ValidationError("monomials use integral ideals")
    f, g = x.f, y.f
    level = level_lcm(f.level, g.level)
    f = _at_level(f, level)
    g = _at_level(g, level)
    h1, h2 = _products(level, a, f, g)
    N = float(a.norm)
    v1, _ = state.evaluate(h1)
    v2, _ = state.evaluate(h2)
    res = abs(complex(v1) - N ** (-state.beta) * complex(v2))
    sf, sg = f.sup_norm(), g.sup_norm()
    tail = ROUNDING * (1 + sf * sg) * 4
    if state.kind in ("extremal", "barycenter"):
        B = state.bound
        gap = zeta_partial(state.field, state.beta, B) - zeta_partial(state.field, state.beta, int(B // N))
        tail += N ** (-state.beta) * sf * sg * abs(gap) / state.zeta()
    if flip:
        # phi(yx) - N^beta phi(xy) = -N^beta (phi(xy) - N^-beta phi(yx)) with roles exchanged
        res *= N ** state.beta
        tail *= N ** state.beta
    return ResidualReport(res, tail, True)


def _at_level(f: CylinderFunction, level: LevelSpec) -> CylinderFunction:
    if f.level == level:
        return f
    return CylinderFunction.from_function(level, lambda y: f(project_point(y, f.level)))


# ---------------------------------------------------------------------------
# projection onto S-invariant functions

def _prime_class_distribution(level: LevelSpec, P: PrimeIdeal, beta: float) -> list[tuple[ResidueElement, float]]:
    """Law of gen(P)^r mod m under the probability weights (1-q^-b) q^-rb, r >= 0.

    Exponents r >= k (k the depth of P, possibly 0) repeat with period T, the
    order of the generator on the other components, so the tail collapses to
    T geometric classes.
    """
    F = level.field
    m = level.ideal
    q = float(P.norm)
    x = q ** (-beta)
    g = reduce_mod(F, canonical_generator(F, Ideal.prime(P)), m)
    k = level.depth(P)
    out = []
    r = residue_one(F, m)
    for e in range(k):
        out.append((r, (1 - x) * x ** e))
        r = r * g
    start, cyc = r, []
    while True:
        cyc.append(r)
        r = r * g
        if r == start:
            break
        if len(cyc) > level.size:
            raise AssertionError("generator orbit did not close")
    T = len(cyc)
    damp = (1 - x) * x ** k / (1 - x ** T)
    for t, s in enumerate(cyc):
        out.append((s, damp * x ** t))
    return out


def _convolve(a: dict, b: list) -> dict:
    acc: dict = {}
    for r1, w1 in a.items():
        for r2, w2 in b:
            acc.setdefault(r1 * r2, []).append(w1 * w2)
    return {r: math.fsum(ws) for r, ws in acc.items()}


@dataclass(frozen=True)
class Projection:
    """Pf for the semigroup generated by ``primes``; values on the invertible points.

    Pf is invariant, so Pf(s u) = Pf(u) for s in the semigroup and u invertible
    at the S-primes.
    """
    level: LevelSpec
    beta: float
    primes: tuple[PrimeIdeal, ...]
    values: Mapping[YPoint, complex]
    zeta_level: float  # zeta_S restricted to the level primes

    def __call__(self, u: YPoint) -> complex:
        return self.values[u]

    def norm_sq(self) -> float:
        """||Pf||^2 = zeta_S * integral over Y_0 of |Pf|^2."""
        lv = self.level
        return self.zeta_level * math.fsum(cylinder_measure(lv, self.beta, u) * abs(v) ** 2
                                           for u, v in self.values.items())

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())


def _class_law(level: LevelSpec, primes: tuple[PrimeIdeal, ...], beta: float) -> dict:
    dist = {residue_one(level.field, level.ideal): 1.0}
    for P in primes:
        dist = _convolve(dist, _prime_class_distribution(level, P, beta))
    return dist


def projection_apply(F: FieldSpec, beta: float, S: Iterable[PrimeIdeal], f) -> Projection:
    """Orthogonal projection onto functions invariant under the semigroup generated by S.

    ``f`` is a CylinderFunction, or a Projection (whose invariant extension is
    used).  The infinite sum over the semigroup is aggregated exactly.
    """
    beta = check_beta(beta)
    if beta <= 1:
        raise DomainError(f"projection needs beta > 1 (got {beta})")
    level = f.level
    if F != level.field:
        raise ValidationError("field mismatch")
    require_y_model(F)
    S = tuple(sorted(set(S)))
    missing = [P for P in level.primes if P not in S]
    if missing:
        raise ValidationError(f"level primes {', '.join(map(str, missing))} are not in S")
    law = _class_law(level, S, beta)
    Y0 = unit_points(level)
    if isinstance(f, Projection):
        # f(s u) = f(u): the law has total mass one
        total = math.fsum(law.values())
        vals = {u: complex(f(u)) * total for u in Y0}
    else:
        vals = {u: _sum_complex(w * complex(f(canonicalize(u.residue * r))) for r, w in law.items())
                for u in Y0}
    zl = 1.0
    for P in level.primes:
        zl /= 1 - float(P.norm) ** (-beta)
    return Projection(level, beta, S, vals, zl)


def l2_norm_sq(f: CylinderFunction, beta: float) -> float:
    """||f||^2 in L^2(Y, mu_beta), a level sum."""
    lv = f.level
    return math.fsum(cylinder_measure(lv, beta, y) * abs(complex(f(y))) ** 2 for y in points(lv))


def norm_check(F: FieldSpec, beta: float, S: Iterable[PrimeIdeal], f: CylinderFunction) -> tuple[float, float]:
    """Both sides of ||f||^2 = zeta_S * int_{Y_0} |f|^2 for an S-invariant f.

    Y_0 is the set of points invertible at every prime of S.
    """
    beta = check_beta(beta)
    if beta <= 1:
        raise DomainError(f"norm identity needs beta > 1 (got {beta})")
    lv = f.level
    S = tuple(set(S))
    zs = 1.0
    for P in S:
        zs /= 1 - float(P.norm) ** (-beta)
    inside = []
    for y in points(lv):
        # invertible at S-primes outside the level: that factor has mass (1 - q^-b)
        w = cylinder_measure(lv, beta, y)
        if all(_unit_at(y, P) for P in S if P in lv.primes):
            for P in S:
                if P not in lv.primes:
                    w *= 1 - float(P.norm) ** (-beta)
            inside.append(w * abs(complex(f(y))) ** 2)
    return l2_norm_sq(f, beta), zs * math.fsum(inside)


def _unit_at(y: YPoint, P: PrimeIdeal) -> bool:
    return not in_prime_power(y.residue.field, P, 1, y.residue.component(P))


def inner_product(f: CylinderFunction, h: CylinderFunction, beta: float) -> complex:
    lv = level_lcm(f.level, h.level)
    f, h = _at_level(f, lv), _at_level(h, lv)
    return _sum_complex(cylinder_measure(lv, beta, y) * complex(f(y)) * complex(h(y)).conjugate()
                        for y in points(lv))


def character_function(level: LevelSpec, chi: Character, a: Ideal | None = None) -> CylinderFunction:
    """y -> chi(a^-1 y) on a times the invertible points, zero elsewhere.

    The character acts through the norm: chi(N(x) mod modulus).  The level
    must see both the modulus of chi and a.
    """
    F = level.field
    a = a if a is not None else Ideal()
    g = canonical_generator(F, a)
    gl = level.ideal

    def fn(y: YPoint) -> complex:
        for P, e in a.factors:
            if level.depth(P) <= e:
                raise ValidationError(f"level too shallow at {P} for the shifted character")
        # y = g u with u a unit: find u from the orbit by dividing components
        for u in unit_points(level):
            if canonicalize(u.residue.scale(g)) == y:
                return complex(chi(_norm_residue(u, chi.modulus)))
        return 0.0

    return CylinderFunction.from_function(level, fn)


def _norm_residue(u: YPoint, M: int) -> int:
    """N(u) mod M for a unit point.

    Over a quadratic field every prime dividing M must be inert and seen by
    the level to the full power dividing M.
    """
    F = u.residue.field
    if F.is_rational:
        return u.residue.to_int() % M
    n, mod = 0, 1
    for p, e in sorted(factor_int(M).items()):
        P = split_prime(F, p)[0]
        if P.f != 2:
            raise UnsupportedFieldError(f"norm characters need {p} inert in {F.label}")
        if u.residue.modulus.exponent(P) < e:
            raise ValidationError(f"level too shallow at {P} for a character mod {M}")
        qe = p ** e
        val = elem_norm(F, u.residue.component(P)) % qe
        n = n + mod * ((val - n) * pow(mod, -1, qe) % qe)
        mod *= qe
    return n


# ---------------------------------------------------------------------------
# diagnostics

def diagnostic_ideal(F: FieldSpec, chi: Character) -> tuple[Ideal, tuple[PrimeIdeal, ...]]:
    A = conductor_primes(F, chi)
    return Ideal.from_factors([(P, 1) for P in A]), A


def uniqueness_diagnostic(F: FieldSpec, chi: Character, beta: float, B: int) -> float:
    """N(a)^-beta * euler_ratio for the test ideal a = product of the primes over the modulus."""
    beta = check_beta(beta)
    a, A = diagnostic_ideal(F, chi)
    return float(a.norm) ** (-beta) * euler_ratio(F, chi, A, beta, int(B))


def uniqueness_scan(F: FieldSpec, chi: Character, beta: float, bounds: Sequence[int]) -> list[float]:
    beta = check_beta(beta)
    a, A = diagnostic_ideal(F, chi)
    scale = float(a.norm) ** (-beta)
    return [scale * r for r in euler_ratio_scan(F, chi, A, beta, bounds)]


def partition_function(F: FieldSpec, beta: float, B: int) -> float:
    """Trace of exp(-beta H) on the ideals of norm <= B; inf flags divergence (beta <= 1)."""
    if beta <= 1:
        return math.inf
    return zeta_partial(F, beta, int(B))
