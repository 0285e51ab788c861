"""Brute-force reference computations.

These avoid the prime-factorization machinery on purpose: ideals are counted
as lattice points modulo units and states are summed over elements.  They are
slow and only meant for Q and imaginary quadratic fields of class number one.
"""
from __future__ import annotations

import math

import numpy as np

from .adelic import CylinderFunction, YPoint, canonicalize
from .numfield import FieldSpec, elem_norm
from .zeta import primes_upto


def element_norms(F: FieldSpec, N: int) -> np.ndarray:
    """Norms of all nonzero a + b*theta with norm <= N (every ideal w_K times)."""
    if F.is_rational:
        n = np.arange(1, N + 1, dtype=np.int64)
        return np.concatenate([n, n])
    if not F.is_imaginary:
        raise ValueError("brute-force element counts need a definite norm form")
    t, c = F.trace, F.const
    # 4N(x) = (2a + t b)^2 + |D| b^2
    bmax = int(math.isqrt(4 * N // abs(F.discriminant))) + 1
    out = []
    for b in range(-bmax, bmax + 1):
        a0 = -t * b / 2
        r = math.sqrt(max(N - abs(F.discriminant) * b * b / 4, 0.0)) + 1
        a = np.arange(math.floor(a0 - r), math.ceil(a0 + r) + 1, dtype=np.int64)
        nv = a * a + t * a * b - c * b * b
        out.append(nv[(nv > 0) & (nv <= N)])
    return np.concatenate(out)


def ideal_norm_counts(F: FieldSpec, N: int) -> np.ndarray:
    """c[n] = number of integral ideals of norm n, n <= N."""
    counts = np.bincount(element_norms(F, N), minlength=N + 1)
    return counts // F.w_K


def ideal_count(F: FieldSpec, N: int) -> int:
    return int(ideal_norm_counts(F, N).sum())


def zeta_direct(F: FieldSpec, beta: float, N: int) -> float:
    c = ideal_norm_counts(F, N)
    n = np.nonzero(c)[0]
    return math.fsum((c[n] * n.astype(np.float64) ** (-beta)).tolist())


def _prime_ideal_norm(F: FieldSpec, p: int) -> int:
    """Norm of a prime above p for Q and Q(i) (p^2 exactly when p = 3 mod 4)."""
    if F.is_rational:
        return p
    if F.d != -1:
        raise ValueError("this oracle handles Q and Q(i) only")
    return p * p if p % 4 == 3 else p


def smooth_zeta_direct(F: FieldSpec, beta: float, B: int, N: int) -> float:
    """Sum of N(a)^-beta over ideals of norm <= N whose prime factors have norm <= B."""
    c = ideal_norm_counts(F, N)
    n = np.arange(N + 1, dtype=np.int64)
    rem = n.copy()
    for p in primes_upto(N):
        p = int(p)
        if _prime_ideal_norm(F, p) > B:
            continue
        while True:
            hit = (rem % p == 0) & (rem > 0)
            if not hit.any():
                break
            rem[hit] //= p
    keep = (rem == 1) & (c > 0)
    idx = np.nonzero(keep)[0]
    return math.fsum((c[idx] * idx.astype(np.float64) ** (-beta)).tolist())


def elements_upto(F: FieldSpec, N: int) -> list[tuple[int, int]]:
    """Nonzero elements of norm <= N (positive integers only over Q)."""
    if F.is_rational:
        return [(n, 0) for n in range(1, N + 1)]
    t, c = F.trace, F.const
    bmax = int(math.isqrt(4 * N // abs(F.discriminant))) + 1
    out = []
    for b in range(-bmax, bmax + 1):
        for a in range(-2 * bmax - 2 * int(math.isqrt(N)) - 2, 2 * bmax + 2 * int(math.isqrt(N)) + 3):
            nv = a * a + t * a * b - c * b * b
            if 0 < nv <= N:
                out.append((a, b))
    return out


def extremal_direct(F: FieldSpec, beta: float, w: YPoint, f: CylinderFunction, N: int,
                    zeta: float) -> complex:
    """sum over elements x with N(x) <= N of N(x)^-beta f(x w) / (w_K' zeta).

    Over Q the positive integers are used; over imaginary fields each ideal
    appears w_K times among its generators.
    """
    mult = 1 if F.is_rational else F.w_K
    re, im = [], []
    for x in elements_upto(F, N):
        norm = x[0] if F.is_rational else elem_norm(F, x)
        v = complex(f(canonicalize(w.residue.scale(x)))) * norm ** (-beta) / mult
        re.append(v.real)
        im.append(v.imag)
    return complex(math.fsum(re), math.fsum(im)) / zeta


def riemann_zeta(beta: float, N: int = 10**6) -> float:
    """Partial sum plus the Euler-Maclaurin tail (two correction terms)."""
    n = np.arange(1, N + 1, dtype=np.float64)
    s = math.fsum((n ** (-beta)).tolist())
    return s + N ** (1 - beta) / (beta - 1) - 0.5 * N ** (-beta) + beta / 12 * N ** (-beta - 1)


def l_series(chi, beta: float, N: int = 10**6) -> complex:
    """sum_{n<=N} chi(n) n^-beta by direct evaluation of the character."""
    re, im = [], []
    for n in range(1, N + 1):
        v = chi(n)
        if v:
            t = v * n ** (-beta)
            re.append(t.real)
            im.append(t.imag)
    return complex(math.fsum(re), math.fsum(im))


CATALAN = 0.915965594177219015054603514932384110774
