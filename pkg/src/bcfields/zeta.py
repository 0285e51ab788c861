"""Truncated Dedekind zeta functions, Dirichlet characters and Euler ratios.

All sums run in increasing-norm order and are accumulated with
``math.fsum`` (correctly rounded), so results do not depend on how the
work is partitioned.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .numfield import (
    FieldSpec,
    Ideal,
    PrimeIdeal,
    factor_int,
    kronecker,
    split_prime,
)


@lru_cache(maxsize=8)
def primes_upto(n: int) -> np.ndarray:
    """Primes <= n as an int64 array (sieve of Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    out = np.flatnonzero(sieve).astype(np.int64)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def _kronecker_table(D: int) -> np.ndarray:
    m = abs(D)
    return np.array([kronecker(D, n) for n in range(m)], dtype=np.int64)


def field_character_values(F: FieldSpec, n: np.ndarray) -> np.ndarray:
    """chi_D(n) for the quadratic character of F (periodic modulo |D|)."""
    if F.is_rational:
        return np.ones_like(n)
    return _kronecker_table(F.discriminant)[n % abs(F.discriminant)]


@lru_cache(maxsize=16)
def ideal_counts(F: FieldSpec, B: int) -> np.ndarray:
    """``a[n]`` = number of integral ideals of norm n, for 0 <= n <= B."""
    B = int(B)
    a = np.zeros(B + 1, dtype=np.int64)
    if F.is_rational:
        a[1:] = 1
    else:
        chi = field_character_values(F, np.arange(B + 1))
        for dd in range(1, B + 1):
            c = chi[dd]
            if c:
                a[dd::dd] += c
    a.flags.writeable = False
    return a


def _terms(F: FieldSpec, beta: float, B: int) -> np.ndarray:
    a = ideal_counts(F, B)
    n = np.arange(1, B + 1, dtype=np.float64)
    return a[1:] * n ** (-float(beta))


def zeta_partial(F: FieldSpec, beta: float, B: int) -> float:
    """Sum of N(a)^-beta over integral ideals with N(a) <= B."""
    if B < 1:
        return 0.0
    return math.fsum(_terms(F, beta, int(B)).tolist())


@lru_cache(maxsize=16)
def prime_norms(F: FieldSpec, B: int) -> np.ndarray:
    """Norms of prime ideals with norm <= B, with multiplicity, sorted."""
    ps = primes_upto(int(B))
    if F.is_rational:
        out = ps.copy()
    else:
        D = F.discriminant
        s = field_character_values(F, ps)
        s = np.where(ps == 2, np.where(D % 2 == 0, 0, np.where(D % 8 == 1, 1, -1)), s)
        split = ps[s == 1]
        ram = ps[s == 0]
        inert = ps[s == -1]
        inert = inert[inert * inert <= B] ** 2
        out = np.sort(np.concatenate([split, split, ram, inert]))
    out.flags.writeable = False
    return out


def prime_ideals(F: FieldSpec, B: int) -> list[PrimeIdeal]:
    out = [P for p in primes_upto(int(B)) for P in split_prime(F, int(p)) if P.norm <= B]
    return sorted(out, key=lambda P: P.sort_key)


def zeta_euler_smooth(F: FieldSpec, beta: float, B: int) -> float:
    """Product of (1 - N(p)^-beta)^-1 over primes of norm <= B.

    Equals the Dirichlet sum over ideals all of whose prime factors have
    norm <= B.
    """
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    q = prime_norms(F, int(B)).astype(np.float64)
    if q.size == 0:
        return 1.0
    return math.exp(-math.fsum(np.log1p(-q ** (-float(beta))).tolist()))


def euler_factor(F: FieldSpec, p: int, beta: float) -> float:
    """Local factor prod_{P | p} (1 - N(P)^-beta)^-1."""
    out = 1.0
    for P in split_prime(F, p):
        out /= 1.0 - P.norm ** (-beta)
    return out


# ---------------------------------------------------------------------------
# characters

def _root_of_unity(num: int, den: int) -> complex:
    fr = Fraction(num, den) % 1
    exact = {Fraction(0): 1 + 0j, Fraction(1, 2): -1 + 0j,
             Fraction(1, 4): 1j, Fraction(3, 4): -1j}
    if fr in exact:
        return exact[fr]
    return cmath.exp(2j * math.pi * fr.numerator / fr.denominator)


def _primitive_root(p: int, e: int) -> int:
    """A generator of (Z/p^e)^* for odd p."""
    phi_p = p - 1
    qs = list(factor_int(phi_p)) if phi_p > 1 else []
    for g in range(2, p + 1):
        if all(pow(g, phi_p // q, p) != 1 for q in qs):
            break
    else:
        g = 1
    if e > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    return g


def unit_group_decomposition(m: int) -> list[tuple[int, int, int]]:
    """Cyclic factors of (Z/m)^* as (prime power, generator mod that power, order).

    Odd parts use the least primitive root; 2^e uses -1 (e >= 2) and 5 (e >= 3).
    """
    out = []
    for p, e in sorted(factor_int(m).items()) if m > 1 else []:
        q = p ** e
        if p == 2:
            if e >= 2:
                out.append((q, q - 1, 2))
            if e >= 3:
                out.append((q, 5, 2 ** (e - 2)))
        else:
            out.append((q, _primitive_root(p, e), (p - 1) * p ** (e - 1)))
    return out


def _crt_lift(m: int, q: int, g: int) -> int:
    """x mod m with x = g mod q and x = 1 mod m/q."""
    r = m // q
    return (g * r * pow(r, -1, q) + q * pow(q, -1, r)) % m if r > 1 else g % m


@dataclass(frozen=True)
class Character:
    modulus: int
    exponents: tuple[int, ...]
    orders: tuple[int, ...]
    table: tuple[complex, ...]

    def __call__(self, n: int) -> complex:
        return self.table[n % self.modulus]

    @property
    def is_trivial(self) -> bool:
        return all(e % o == 0 for e, o in zip(self.exponents, self.orders))

    @property
    def is_real(self) -> bool:
        return all(v.imag == 0 for v in self.table)

    def values_array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.complex128)

    def __str__(self) -> str:
        return f"{self.modulus}:" + ",".join(map(str, self.exponents))


@lru_cache(maxsize=None)
def make_character(m: int, exponents: tuple[int, ...] | Sequence[int] = ()) -> Character:
    """The Dirichlet character mod m sending the i-th cyclic generator to
    exp(2*pi*i*exponents[i]/order_i)."""
    if m < 1:
        raise ValidationError(f"modulus must be positive, got {m}")
    exponents = tuple(int(e) for e in exponents)
    dec = unit_group_decomposition(m)
    if len(exponents) != len(dec):
        raise ValidationError(
            f"(Z/{m})^* has {len(dec)} cyclic factors; got exponent vector of length {len(exponents)}"
        )
    orders = tuple(o for _, _, o in dec)
    gens = [_crt_lift(m, q, g) for q, g, _ in dec]
    table = [0j] * m
    for ks in product(*(range(o) for o in orders)):
        n = 1
        for g, k in zip(gens, ks):
            n = n * pow(g, k, m) % m
        num = sum(Fraction(k * e, o) for k, e, o in zip(ks, exponents, orders))
        table[n % m] = _root_of_unity(num.numerator, num.denominator)
    if m == 1:
        table = [1 + 0j]
    return Character(m, exponents, orders, tuple(table))


def parse_character(text: str) -> Character:
    """``"3:1"`` is the character mod 3 with exponent vector (1,)."""
    try:
        mod, _, exps = text.partition(":")
        ex = tuple(int(e) for e in exps.split(",") if e.strip()) if exps else ()
        return make_character(int(mod), ex)
    except ValueError as err:
        raise ValidationError(f"bad character selector {text!r}: {err}") from err


def char_on_ideal(F: FieldSpec, chi: Character, a: Ideal) -> complex:
    """chi(N(a) mod m), zero when N(a) shares a factor with m."""
    n = a.norm
    if n.denominator != 1:
        raise ValidationError("characters are evaluated on integral ideals")
    return chi(int(n))


def conductor_primes(F: FieldSpec, chi: Character) -> tuple[PrimeIdeal, ...]:
    """Prime ideals above the rational primes dividing the modulus."""
    if chi.modulus == 1:
        return ()
    return tuple(P for p in sorted(factor_int(chi.modulus)) for P in split_prime(F, p))


def euler_ratio(F: FieldSpec, chi: Character, A: Iterable[PrimeIdeal], beta: float, B: int) -> float:
    """prod_{N(p)<=B} |1 - N(p)^-b| / prod_{N(p)<=B, p not in A} |1 - chi(p) N(p)^-b|."""
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    return math.exp(_log_ratio(F, chi, tuple(A), float(beta), int(B)))


def _log_ratio(F: FieldSpec, chi: Character, A: tuple, beta: float, B: int) -> float:
    q = prime_norms(F, B)
    qf = q.astype(np.float64)
    x = qf ** (-beta)
    num = np.log1p(-x)
    vals = chi.values_array()[q % chi.modulus]
    # drop one copy per excluded prime (matched by norm)
    keep = np.ones(q.size, dtype=bool)
    for P in A:
        idx = np.flatnonzero((q == P.norm) & keep)
        if idx.size:
            keep[idx[0]] = False
    den = np.log(np.abs(1 - vals[keep] * x[keep]))
    return math.fsum(num.tolist()) - math.fsum(den.tolist())


def euler_ratio_scan(F: FieldSpec, chi: Character, A: Iterable[PrimeIdeal], beta: float,
                     bounds: Sequence[int]) -> list[float]:
    """euler_ratio at several truncations, sharing the prime table."""
    return [euler_ratio(F, chi, A, beta, B) for B in bounds]


def l_partial(chi: Character, beta: float, B: int) -> complex:
    """Sum_{n<=B} chi(n) n^-beta."""
    if B < 1:
        return 0j
    n = np.arange(1, int(B) + 1)
    terms = chi.values_array()[n % chi.modulus] * n.astype(np.float64) ** (-float(beta))
    return complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))


# ---------------------------------------------------------------------------
# tails

@dataclass(frozen=True)
class TailBound:
    B: int
    beta: float
    bound: float
    rigorous: bool


HEURISTIC_SAFETY = 2.0


def zeta_tail_bound(F: FieldSpec, beta: float, B: int) -> TailBound:
    """Bound on sum_{N(a) > B} N(a)^-beta.

    Over Q the integral test gives a rigorous bound for every beta > 1.  For
    quadratic fields a_K(n) <= d(n) yields the rigorous bound
    2 zeta(beta) floor(sqrt B)^(1-beta)/(beta-1), used for beta > 2; for
    1 < beta <= 2 a Richardson estimate from partial sums at B/2 and B is
    returned (times a safety factor) and flagged non-rigorous.
    """
    B = int(B)
    if beta <= 1:
        return TailBound(B, beta, math.inf, False)
    if F.is_rational:
        return TailBound(B, beta, B ** (1 - beta) / (beta - 1), True)
    if beta > 2:
        r = max(math.isqrt(B), 1)
        zeta_beta = _riemann_zeta(beta)
        return TailBound(B, beta, 2 * zeta_beta * r ** (1 - beta) / (beta - 1), True)
    half = max(B // 2, 1)
    diff = zeta_partial(F, beta, B) - zeta_partial(F, beta, half)
    ratio = (B / half) ** (beta - 1) - 1
    est = diff / ratio if ratio > 0 else math.inf
    return TailBound(B, beta, HEURISTIC_SAFETY * est, False)


def _riemann_zeta(beta: float) -> float:
    """zeta(beta) for beta > 1, rounded up: partial sum plus integral-test tail."""
    N = 10_000
    n = np.arange(1, N + 1, dtype=np.float64)
    return math.fsum((n ** (-beta)).tolist()) + N ** (1 - beta) / (beta - 1)
