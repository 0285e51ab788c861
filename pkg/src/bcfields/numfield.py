"""Exact arithmetic in Q and quadratic fields.

Elements of the ring of integers O are pairs ``(a, b)`` standing for
``a + b*theta`` where ``theta = sqrt(d)`` if ``d = 2, 3 mod 4`` and
``theta = (1 + sqrt(d))/2`` if ``d = 1 mod 4``.  In both cases
``theta**2 = t*theta + c`` with ``(t, c) = (0, d)`` or ``(1, (d - 1)/4)``.
Over Q every element has ``b == 0``.

Ideals are kept in factored form.  Residues modulo an integral ideal are
kept one component per prime power, each component reduced against the
Hermite normal form of that prime power, so that equality of residues is
plain tuple equality.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Iterable, Iterator, Mapping

from .errors import NonInvertibleError, UnsupportedFieldError, ValidationError

Element = tuple[int, int]

CN1_IMAGINARY = (-1, -2, -3, -7, -11, -19, -43, -67, -163)


# ---------------------------------------------------------------------------
# elementary number theory

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic for n < 3.3e24
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factor_int(n: int) -> dict[int, int]:
    """Trial-division factorization of a positive integer."""
    if n < 1:
        raise ValidationError(f"cannot factor {n}")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factor_int(abs(n)).values())


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol for odd n
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def sqrt_mod_prime(a: int, p: int) -> int:
    """A square root of ``a`` modulo the prime ``p`` (Tonelli-Shanks)."""
    a %= p
    if a == 0 or p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        raise ValueError(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def valuation_int(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# fields and elements

@dataclass(frozen=True)
class FieldSpec:
    kind: str  # "rational" | "quadratic"
    d: int | None
    discriminant: int
    theta_half: bool  # True when theta = (1 + sqrt d)/2
    is_imaginary: bool
    w_K: int | None
    cn1_imaginary: bool

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    @property
    def trace(self) -> int:
        return 1 if self.theta_half else 0

    @property
    def const(self) -> int:
        if self.is_rational:
            return 0
        return (self.d - 1) // 4 if self.theta_half else self.d

    @property
    def label(self) -> str:
        return "Q" if self.is_rational else f"Q(sqrt{self.d})"

    def __str__(self) -> str:
        return self.label


def make_field(descriptor) -> FieldSpec:
    """Build a FieldSpec from ``"Q"``, ``"Q(sqrt-1)"``, an int ``d``, or a
    mapping ``{"kind": "quadratic", "d": -1}``."""
    if isinstance(descriptor, FieldSpec):
        return descriptor
    if isinstance(descriptor, str):
        return parse_field(descriptor)
    if isinstance(descriptor, int):
        return _quadratic(descriptor)
    if isinstance(descriptor, Mapping):
        kind = descriptor.get("kind")
        if kind == "rational":
            return RATIONALS
        if kind == "quadratic":
            return _quadratic(descriptor.get("d"))
    raise ValidationError(f"unrecognised field descriptor {descriptor!r}")


def _quadratic(d) -> FieldSpec:
    if not isinstance(d, int) or d in (0, 1):
        raise ValidationError(f"d must be a squarefree integer other than 0, 1; got {d!r}")
    if not is_squarefree(d):
        raise ValidationError(f"d = {d} is not squarefree")
    half = d % 4 == 1
    if d < 0:
        w = {-1: 4, -3: 6}.get(d, 2)
    else:
        w = None  # infinite unit group
    return FieldSpec(
        kind="quadratic",
        d=d,
        discriminant=d if half else 4 * d,
        theta_half=half,
        is_imaginary=d < 0,
        w_K=w,
        cn1_imaginary=d in CN1_IMAGINARY,
    )


RATIONALS = FieldSpec("rational", None, 1, False, False, 2, False)

_FIELD_RE = re.compile(r"^Q\(\s*(?:sqrt\s*\(?\s*([+-]?\d+)\s*\)?|i)\s*\)$")


def parse_field(text: str) -> FieldSpec:
    s = text.strip()
    if s in ("Q", "QQ"):
        return RATIONALS
    m = _FIELD_RE.match(s)
    if not m:
        raise ValidationError(f"cannot parse field descriptor {text!r}")
    return _quadratic(-1 if m.group(1) is None else int(m.group(1)))


def elem_mul(F: FieldSpec, x: Element, y: Element) -> Element:
    a, b = x
    c, e = y
    bb = b * e
    return (a * c + F.const * bb, a * e + b * c + F.trace * bb)


def elem_add(x: Element, y: Element) -> Element:
    return (x[0] + y[0], x[1] + y[1])


def elem_conj(F: FieldSpec, x: Element) -> Element:
    a, b = x
    return (a + F.trace * b, -b)


def elem_norm(F: FieldSpec, x: Element) -> int:
    a, b = x
    return a * a + F.trace * a * b - F.const * b * b


def elem_pow(F: FieldSpec, x: Element, n: int) -> Element:
    result: Element = (1, 0)
    while n:
        if n & 1:
            result = elem_mul(F, result, x)
        x = elem_mul(F, x, x)
        n >>= 1
    return result


def as_element(x) -> Element:
    if isinstance(x, int):
        return (x, 0)
    a, b = x
    return (int(a), int(b))


def minpoly_at(F: FieldSpec, r: int) -> int:
    return r * r - F.trace * r - F.const


@lru_cache(maxsize=None)
def unit_roots(F: FieldSpec) -> tuple[Element, ...]:
    """The roots of unity of O, found by enumerating elements of norm 1."""
    if F.is_rational:
        return ((1, 0), (-1, 0))
    if not F.is_imaginary:
        raise UnsupportedFieldError("real quadratic fields have an infinite unit group")
    return tuple(sorted(elements_of_norm(F, 1)))


def elements_of_norm(F: FieldSpec, n: int) -> list[Element]:
    """All elements of O with norm ``n`` (imaginary quadratic or Q)."""
    if F.is_rational:
        r = isqrt(n)
        return [(r, 0), (-r, 0)] if r * r == n and n > 0 else []
    if not F.is_imaginary:
        raise UnsupportedFieldError("norm-form enumeration needs a definite norm form")
    D = -F.discriminant
    t = F.trace
    out = set()
    bmax = isqrt(4 * n // D) + 1
    for b in range(-bmax, bmax + 1):
        rest = 4 * n - D * b * b
        if rest < 0:
            continue
        s = isqrt(rest)
        if s * s != rest:
            continue
        for sg in (s, -s):
            num = sg - t * b
            if num % 2 == 0:
                x = (num // 2, b)
                if elem_norm(F, x) == n:
                    out.add(x)
    return sorted(out)


# ---------------------------------------------------------------------------
# prime ideals

@dataclass(frozen=True)
class PrimeIdeal:
    p: int
    f: int
    ramified: bool
    root: int | None = None

    @property
    def norm(self) -> int:
        return self.p ** self.f

    @property
    def sort_key(self) -> tuple[int, int, int]:
        return (self.norm, self.p, -1 if self.root is None else self.root)

    def __lt__(self, other: "PrimeIdeal") -> bool:
        return self.sort_key < other.sort_key

    def __str__(self) -> str:
        if self.root is not None:
            return f"P({self.p},{self.root})"
        return f"P({self.p})"


def split_type(F: FieldSpec, p: int) -> int:
    """+1 split, -1 inert, 0 ramified (Kronecker symbol of the discriminant)."""
    if F.is_rational:
        raise ValidationError("split type is only defined for quadratic fields")
    D = F.discriminant
    if p == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 == 1 else -1
    return kronecker(D, p)


@lru_cache(maxsize=None)
def split_prime(F: FieldSpec, p: int) -> tuple[PrimeIdeal, ...]:
    """The prime ideals of O above the rational prime ``p``."""
    if not is_prime(p):
        raise ValidationError(f"{p} is not prime")
    if F.is_rational:
        return (PrimeIdeal(p, 1, False),)
    s = split_type(F, p)
    if s == -1:
        return (PrimeIdeal(p, 2, False),)
    if s == 0:
        return (PrimeIdeal(p, 1, True),)
    return tuple(PrimeIdeal(p, 1, False, r) for r in sorted(_split_roots(F, p)))


def _split_roots(F: FieldSpec, p: int) -> tuple[int, int]:
    if p == 2:
        roots = [r for r in (0, 1) if minpoly_at(F, r) % 2 == 0]
        return (roots[0], roots[1])
    if F.theta_half:
        s = sqrt_mod_prime(F.d, p)
        inv2 = (p + 1) // 2
        return ((1 + s) * inv2 % p, (1 - s) * inv2 % p)
    s = sqrt_mod_prime(F.d, p)
    return (s, (-s) % p)


def _ramified_root(F: FieldSpec, p: int) -> int:
    if p == 2:
        return F.const % 2
    return F.trace * ((p + 1) // 2) % p


@lru_cache(maxsize=None)
def hensel_root(F: FieldSpec, P: PrimeIdeal, k: int) -> int:
    """The root of the minimal polynomial of theta modulo p**k lifting P.root."""
    p, r = P.p, P.root
    mod = p
    while mod < p ** k:
        mod = min(mod * mod, p ** k)
        deriv = (2 * r - F.trace) % mod
        r = (r - minpoly_at(F, r) * pow(deriv, -1, mod)) % mod
    return r % p ** k


@lru_cache(maxsize=None)
def prime_power_hnf(F: FieldSpec, P: PrimeIdeal, k: int) -> tuple[int, int, int]:
    """``(A, B, C)`` with P**k = Z*A + Z*(B + C*theta), 0 <= B < A."""
    p = P.p
    if k == 0:
        return (1, 0, 1)
    if F.is_rational:
        return (p ** k, 0, 1)
    if P.f == 2:
        return (p ** k, 0, p ** k)
    if not P.ramified:
        pk = p ** k
        return (pk, (-hensel_root(F, P, k)) % pk, 1)
    j, odd = divmod(k, 2)
    if not odd:
        return (p ** j, 0, p ** j)
    r = _ramified_root(F, p)
    return (p ** (j + 1), p ** j * ((-r) % p), p ** j)


def reduce_component(F: FieldSpec, P: PrimeIdeal, k: int, x: Element) -> Element:
    A, B, C = prime_power_hnf(F, P, k)
    a, b = x
    q = b // C
    a -= q * B
    b -= q * C
    return (a % A, b)


def in_prime_power(F: FieldSpec, P: PrimeIdeal, k: int, x: Element) -> bool:
    return reduce_component(F, P, k, x) == (0, 0)


def valuation(F: FieldSpec, P: PrimeIdeal, x: Element, cap: int | None = None) -> int:
    """v_P(x), truncated at ``cap`` (x = 0 has valuation ``cap``)."""
    x = as_element(x)
    if x == (0, 0):
        if cap is None:
            raise ValueError("valuation of 0")
        return cap
    if cap is None:
        cap = valuation_int(elem_norm(F, x), P.p) + 1
    if F.is_rational:
        return min(valuation_int(x[0], P.p), cap)
    if P.f == 2:
        v = min(valuation_int(x[0], P.p) if x[0] else cap, valuation_int(x[1], P.p) if x[1] else cap)
        return min(v, cap)
    v = 0
    while v < cap and in_prime_power(F, P, v + 1, x):
        v += 1
    return v


@lru_cache(maxsize=None)
def uniformizer(F: FieldSpec, P: PrimeIdeal) -> Element:
    """An element of O with P-adic valuation exactly 1."""
    if F.is_rational or not P.ramified:
        return (P.p, 0)
    r = _ramified_root(F, P.p)
    for cand in ((-r, 1), (-r - P.p, 1)):
        if valuation(F, P, cand) == 1:
            return cand
    raise AssertionError("no uniformizer found")  # unreachable for quadratic fields


def divide_by_uniformizer(F: FieldSpec, P: PrimeIdeal, x: Element, k: int) -> Element:
    """An element y with y*pi == x modulo P**k, for x in P (pi the uniformizer)."""
    x = as_element(x)
    p = P.p
    if F.is_rational or not P.ramified:
        if P.root is not None:
            # split: the residue is carried by the integer coordinate
            x = reduce_component(F, P, k, x)
        if x[0] % p or x[1] % p:
            raise ValueError(f"{x} is not divisible by the uniformizer at {P}")
        return (x[0] // p, x[1] // p)
    pi = uniformizer(F, P)
    y = elem_mul(F, x, elem_conj(F, pi))
    if y[0] % p or y[1] % p:
        raise ValueError(f"{x} is not divisible by the uniformizer at {P}")
    y = (y[0] // p, y[1] // p)
    w = elem_norm(F, pi) // p
    winv = pow(w, -1, p ** (k + 1))
    return (y[0] * winv, y[1] * winv)


# ---------------------------------------------------------------------------
# ideals

@dataclass(frozen=True)
class Ideal:
    factors: tuple[tuple[PrimeIdeal, int], ...] = ()

    @classmethod
    def from_factors(cls, items: Mapping[PrimeIdeal, int] | Iterable[tuple[PrimeIdeal, int]]) -> "Ideal":
        acc: dict[PrimeIdeal, int] = {}
        pairs = items.items() if isinstance(items, Mapping) else items
        for P, e in pairs:
            acc[P] = acc.get(P, 0) + e
        return cls(tuple(sorted(((P, e) for P, e in acc.items() if e), key=lambda t: t[0].sort_key)))

    @classmethod
    def prime(cls, P: PrimeIdeal, e: int = 1) -> "Ideal":
        return cls.from_factors({P: e})

    @property
    def norm(self) -> Fraction:
        n = Fraction(1)
        for P, e in self.factors:
            n *= Fraction(P.norm) ** e
        return n

    @property
    def is_integral(self) -> bool:
        return all(e > 0 for _, e in self.factors)

    @property
    def is_unit(self) -> bool:
        return not self.factors

    def exponent(self, P: PrimeIdeal) -> int:
        for Q, e in self.factors:
            if Q == P:
                return e
        return 0

    @property
    def support(self) -> tuple[PrimeIdeal, ...]:
        return tuple(P for P, _ in self.factors)

    def __mul__(self, other: "Ideal") -> "Ideal":
        return Ideal.from_factors(list(self.factors) + list(other.factors))

    def inverse(self) -> "Ideal":
        return Ideal(tuple((P, -e) for P, e in self.factors))

    def __truediv__(self, other: "Ideal") -> "Ideal":
        return self * other.inverse()

    def __pow__(self, n: int) -> "Ideal":
        return Ideal.from_factors([(P, e * n) for P, e in self.factors])

    def divides(self, other: "Ideal") -> bool:
        return all(other.exponent(P) >= e for P, e in self.factors)

    @property
    def sort_key(self):
        return (self.norm, tuple((P.sort_key, e) for P, e in self.factors))

    def __str__(self) -> str:
        if not self.factors:
            return "(1)"
        return "*".join(str(P) if e == 1 else f"{P}^{e}" for P, e in self.factors)


UNIT_IDEAL = Ideal()


def ideal_norm(F: FieldSpec, a: Ideal) -> Fraction | int:
    n = a.norm
    return int(n) if n.denominator == 1 else n


def rational_ideal(F: FieldSpec, q: int | Fraction) -> Ideal:
    """The ideal generated by a nonzero rational number."""
    q = Fraction(q)
    if q == 0:
        raise ValidationError("the zero ideal is not allowed")
    acc: dict[PrimeIdeal, int] = {}
    for n, sign in ((q.numerator, 1), (q.denominator, -1)):
        for p, e in factor_int(abs(n)).items():
            for P in split_prime(F, p):
                acc[P] = acc.get(P, 0) + sign * e * (2 if P.ramified else 1)
    return Ideal.from_factors(acc)


def element_ideal(F: FieldSpec, x) -> Ideal:
    """Factorization of the principal ideal (x) for nonzero x in O."""
    x = as_element(x)
    n = abs(elem_norm(F, x))
    if n == 0:
        raise ValidationError("the zero ideal is not allowed")
    acc = {}
    for p in factor_int(n):
        for P in split_prime(F, p):
            v = valuation(F, P, x)
            if v:
                acc[P] = v
    return Ideal.from_factors(acc)


def primes_up_to_norm(F: FieldSpec, B: int) -> list[PrimeIdeal]:
    from .zeta import primes_upto  # numpy sieve

    out: list[PrimeIdeal] = []
    for p in primes_upto(int(B)):
        for P in split_prime(F, int(p)):
            if P.norm <= B:
                out.append(P)
    out.sort(key=lambda P: P.sort_key)
    return out


def iter_ideals(F: FieldSpec, B: int) -> Iterator[tuple[int, tuple[tuple[PrimeIdeal, int], ...]]]:
    """Depth-first walk over integral ideals of norm <= B as (norm, factors)."""
    primes = primes_up_to_norm(F, B)

    def rec(i: int, norm: int, factors: tuple):
        yield norm, factors
        for j in range(i, len(primes)):
            P = primes[j]
            q = P.norm
            if norm * q > B:
                break
            n2, e = norm * q, 1
            while n2 <= B:
                yield from rec(j + 1, n2, factors + ((P, e),))
                n2 *= q
                e += 1

    yield from rec(0, 1, ())


def enumerate_ideals(F: FieldSpec, B: int) -> list[Ideal]:
    """All integral ideals of norm <= B in canonical order."""
    if B < 1:
        return []
    ideals = [Ideal(f) for _, f in iter_ideals(F, B)]
    ideals.sort(key=lambda a: a.sort_key)
    return ideals


# ---------------------------------------------------------------------------
# generators (class number one)

def _require_principal_model(F: FieldSpec) -> None:
    if not (F.is_rational or F.cn1_imaginary):
        raise UnsupportedFieldError(
            f"{F.label}: canonical generators need Q or an imaginary quadratic field of class number one"
        )


def _generator_key(x: Element):
    a, b = x
    return (-a, 0 if b >= 0 else 1, abs(b))


@lru_cache(maxsize=None)
def canonical_generator(F: FieldSpec, a: Ideal) -> Element:
    """The canonical generator of an integral ideal.

    Over Q this is the positive generator.  For imaginary quadratic fields of
    class number one it is the associate with largest first coordinate,
    ties going to the smallest nonnegative second coordinate.
    """
    _require_principal_model(F)
    if not a.is_integral and not a.is_unit:
        raise ValidationError("canonical_generator expects an integral ideal")
    n = int(a.norm)
    if F.is_rational:
        return (n, 0)
    cands = [x for x in elements_of_norm(F, n)
             if all(in_prime_power(F, P, e, x) for P, e in a.factors)]
    if not cands:
        raise AssertionError(f"no generator found for {a}")  # impossible for cn1 fields
    return min(cands, key=_generator_key)


def fractional_generator(F: FieldSpec, a: Ideal) -> tuple[Element, Element]:
    """``(num, den)`` in O with a = (num)/(den); positive over Q."""
    num = Ideal(tuple((P, e) for P, e in a.factors if e > 0))
    den = Ideal(tuple((P, -e) for P, e in a.factors if e < 0))
    return canonical_generator(F, num), canonical_generator(F, den)


# ---------------------------------------------------------------------------
# residue rings

def _modulus_items(m: Ideal) -> tuple[tuple[PrimeIdeal, int], ...]:
    if not m.is_integral:
        raise ValidationError("residue rings need an integral modulus")
    return m.factors


@dataclass(frozen=True)
class ResidueElement:
    """An element of O/m, one reduced component per prime power of m."""
    field: FieldSpec
    modulus: Ideal
    components: tuple[Element, ...]

    def _check(self, other: "ResidueElement") -> None:
        if other.modulus != self.modulus or other.field != self.field:
            raise ValidationError("residues live in different rings")

    def __add__(self, other: "ResidueElement") -> "ResidueElement":
        self._check(other)
        return _build(self.field, self.modulus,
                      (elem_add(x, y) for x, y in zip(self.components, other.components)))

    def __neg__(self) -> "ResidueElement":
        return _build(self.field, self.modulus, ((-x[0], -x[1]) for x in self.components))

    def __sub__(self, other: "ResidueElement") -> "ResidueElement":
        return self + (-other)

    def __mul__(self, other: "ResidueElement") -> "ResidueElement":
        self._check(other)
        F = self.field
        return _build(F, self.modulus,
                      (elem_mul(F, x, y) for x, y in zip(self.components, other.components)))

    def scale(self, x) -> "ResidueElement":
        x = as_element(x)
        F = self.field
        return _build(F, self.modulus, (elem_mul(F, c, x) for c in self.components))

    def is_unit(self) -> bool:
        F = self.field
        return all(not in_prime_power(F, P, 1, c)
                   for (P, _), c in zip(self.modulus.factors, self.components))

    def is_zero(self) -> bool:
        return all(c == (0, 0) for c in self.components)

    def component(self, P: PrimeIdeal) -> Element:
        for (Q, _), c in zip(self.modulus.factors, self.components):
            if Q == P:
                return c
        raise KeyError(P)

    def to_int(self) -> int:
        """CRT representative in [0, M) for residues over Q."""
        if not self.field.is_rational:
            raise ValidationError("to_int is only meaningful over Q")
        n, M = 0, 1
        for (P, k), (a, _) in zip(self.modulus.factors, self.components):
            q = P.p ** k
            n = n + M * ((a - n) * pow(M, -1, q) % q)
            M *= q
        return n

    def __str__(self) -> str:
        if self.field.is_rational:
            return str(self.to_int())
        return "[" + ";".join(f"{a}{b:+d}t" for a, b in self.components) + "]"


def _build(F: FieldSpec, m: Ideal, comps: Iterable[Element]) -> ResidueElement:
    return ResidueElement(F, m, tuple(reduce_component(F, P, k, c)
                                      for (P, k), c in zip(m.factors, comps)))


def reduce_mod(F: FieldSpec, x, m: Ideal) -> ResidueElement:
    """The image of x in O/m."""
    x = as_element(x)
    return _build(F, m, (x for _ in _modulus_items(m)))


def residue_from_components(F: FieldSpec, m: Ideal, comps: Iterable) -> ResidueElement:
    return _build(F, m, (as_element(c) for c in comps))


def project_residue(r: ResidueElement, m: Ideal) -> ResidueElement:
    """Image of r under O/M -> O/m for m dividing M."""
    if not m.divides(r.modulus):
        raise ValidationError(f"{m} does not divide {r.modulus}")
    return _build(r.field, m, (r.component(P) for P, _ in m.factors))


def extend_residue(r: ResidueElement, m: Ideal, default: Element = (1, 0)) -> ResidueElement:
    """Reduce the stored representatives of r modulo m.

    Primes of m absent from r.modulus get the component ``default``.  The
    result depends on the representatives, so use it only for residues whose
    representatives are the intended elements (e.g. unit data in states).
    """
    have = dict(zip(r.modulus.support, r.components))
    return _build(r.field, m, (have.get(P, default) for P, _ in m.factors))


def residue_invert(F: FieldSpec, r: ResidueElement) -> ResidueElement:
    comps = []
    for (P, k), c in zip(r.modulus.factors, r.components):
        if in_prime_power(F, P, 1, c):
            raise NonInvertibleError(f"residue is not a unit at {P}", prime=P)
        A, _, C = prime_power_hnf(F, P, k)
        if C == 1:
            comps.append((pow(c[0], -1, A), 0))
        else:
            n = elem_norm(F, c)
            conj = elem_conj(F, c)
            inv = pow(n, -1, A)
            comps.append((conj[0] * inv, conj[1] * inv))
    return _build(F, r.modulus, comps)


def residue_one(F: FieldSpec, m: Ideal) -> ResidueElement:
    return reduce_mod(F, 1, m)


def residue_zero(F: FieldSpec, m: Ideal) -> ResidueElement:
    return reduce_mod(F, 0, m)


def component_reps(F: FieldSpec, P: PrimeIdeal, k: int) -> list[Element]:
    """Canonical representatives of O/P**k."""
    A, _, C = prime_power_hnf(F, P, k)
    return [(a, b) for b in range(C) for a in range(A)]

