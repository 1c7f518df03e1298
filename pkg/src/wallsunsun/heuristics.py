"""Heuristic counts and the constants behind them.

The quotient R(p) of a prime is modelled as uniformly distributed in
[0, p).  Summing 1/p over primes then predicts about log log N + A
exceptional primes below N (A is Mertens' constant) and
``w * (log log N2 - log log N1)`` quotients of absolute value below w/2 in
[N1, N2].  The Euler products C1..C4 govern how often Q(p) = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import mpmath
import numpy as np
from mpmath import mp, mpf

from .prime_sieve import small_primes

PRECISION_DIGITS = 40
MERTENS_MIN_N = 286
MERTENS_MAX_N = 10**9


def _mobius(n: int) -> int:
    mu, q = 1, 2
    while q * q <= n:
        if n % q == 0:
            n //= q
            if n % q == 0:
                return 0
            mu = -mu
        q += 1
    return -mu if n > 1 else mu


def zeta_int(s: int, n_direct: int = 100, em_terms: int = 20) -> mpf:
    """zeta(s) for an integer s >= 2: direct sum below n_direct plus Euler-Maclaurin tail."""
    if s < 2:
        raise ValueError("zeta_int needs s >= 2")
    with mp.workdps(PRECISION_DIGITS + 10):
        s_ = mpf(s)
        n = mpf(n_direct)
        total = mpmath.fsum(mpf(k) ** -s_ for k in range(1, n_direct))
        total += n ** (1 - s_) / (s_ - 1) + n**-s_ / 2
        rising = s_  # s (s+1) ... (s+2j-2)
        for j in range(1, em_terms + 1):
            total += mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j) * rising * n ** (-s_ - 2 * j + 1)
            rising *= (s_ + 2 * j - 1) * (s_ + 2 * j)
        return +total


def prime_zeta(s: int, terms: int = 60) -> mpf:
    """Sum over primes of p**-s, by Moebius inversion of log zeta.

    ``sum_k mu(k)/k * log zeta(k s)`` truncated after ``terms`` values of k;
    terms=1 gives log zeta(s), an overestimate.
    """
    if s < 2:
        raise ValueError("the prime zeta series diverges for s < 2")
    if terms < 1:
        raise ValueError("terms must be positive")
    with mp.workdps(PRECISION_DIGITS):
        total = mpf(0)
        for k in range(1, terms + 1):
            mu = _mobius(k)
            if mu:
                total += mpf(mu) / k * mpmath.log(zeta_int(k * s))
        return +total


def mertens_constant(terms: int = 60) -> mpf:
    """A = gamma - sum_{k>=2} P(k)/k, with P the prime zeta function."""
    with mp.workdps(PRECISION_DIGITS):
        return +(mpmath.euler - mpmath.fsum(prime_zeta(k) / k for k in range(2, terms + 1)))


MERTENS_A = 0.261497212847642783755


def mertens_check(n: int) -> tuple[float, bool | None]:
    """(sum of 1/p for p <= n, whether the two-sided bound holds).

    The bound ``|sum - log log n - A| < 1/(2 log(n)**2)`` is only asserted for
    n >= 286; below that the flag is None.
    """
    if n > MERTENS_MAX_N:
        raise ValueError(f"n is limited to {MERTENS_MAX_N}")
    primes = small_primes(int(n)).primes
    total = math.fsum(1.0 / primes.astype(np.float64))
    if n < MERTENS_MIN_N:
        return total, None
    ln = math.log(n)
    center = math.log(ln) + MERTENS_A
    slack = 1.0 / (2.0 * ln * ln)
    return total, center - slack < total < center + slack


def expected_exceptional(n: float) -> float:
    """log log N + A: expected number of exceptional primes below N.

    Defined for N > 1; the Mertens error bound only backs it from N = 286 on.
    """
    if n <= 1:
        raise ValueError("N must exceed 1")
    return math.log(math.log(n)) + MERTENS_A


def _phi(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def expected_quotient_count(n1: float, n2: float, width: float, class_modulus: int = 1) -> float:
    """width / phi(modulus) * (log log N2 - log log N1)."""
    if not 10 <= n1 < n2:
        raise ValueError("need 10 <= N1 < N2")
    if width < 1:
        raise ValueError("width must be at least 1")
    with mp.workdps(30):
        val = mpf(width) / _phi(class_modulus) * (
            mpmath.log(mpmath.log(mpf(n2))) - mpmath.log(mpmath.log(mpf(n1))))
    return float(val)


@dataclass(frozen=True)
class HeuristicConstants:
    A: float
    gamma: float
    C1: float
    C2: float
    C3: float
    C4: float
    prime_limit: int
    tail_bound: float


def euler_product_constants(prime_limit: int = 2 * 10**6) -> HeuristicConstants:
    """C1 = 342/595 P1, C2 = 27/38 P2, C3 = P1'/4, C4 = P2'/4.

    P1 = prod (1 - p/(p^3 - 1)), P2 = prod (1 - 1/(p(p - 1))), primed products
    skip p = 2, 5.  The factors are 1 - O(1/p^2), so the neglected tail is
    about exp(-1/(L log L)); that correction is applied and its size returned.
    """
    p = small_primes(int(prime_limit)).primes.astype(np.float64)
    f1 = np.log1p(-p / (p**3 - 1))
    f2 = np.log1p(-1.0 / (p * (p - 1)))
    keep = (p != 2) & (p != 5)
    tail = 1.0 / (prime_limit * math.log(prime_limit))
    s1, s2 = math.fsum(f1), math.fsum(f2)
    s1x, s2x = math.fsum(f1[keep]), math.fsum(f2[keep])
    corr = math.exp(-tail)
    return HeuristicConstants(
        A=MERTENS_A,
        gamma=float(mpmath.euler),
        C1=342 / 595 * math.exp(s1) * corr,
        C2=27 / 38 * math.exp(s2) * corr,
        C3=math.exp(s1x) / 4 * corr,
        C4=math.exp(s2x) / 4 * corr,
        prime_limit=int(prime_limit),
        tail_bound=tail,
    )


DEFAULT_BOUNDS = (10, 100, 1000, 10_000, 100_000)


@dataclass
class QuotientHistogram:
    bounds: tuple[int, ...] = DEFAULT_BOUNDS
    counts: list[int] = field(default_factory=list)
    positive: int = 0
    negative: int = 0
    zero: int = 0

    @property
    def total(self) -> int:
        return self.positive + self.negative + self.zero

    def as_dict(self) -> dict[str, int]:
        out = {f"lt_{b}": c for b, c in zip(self.bounds, self.counts)}
        out.update(positive=self.positive, negative=self.negative, zero=self.zero)
        return out


def aggregate_quotients(records: Iterable, bounds: tuple[int, ...] = DEFAULT_BOUNDS) -> QuotientHistogram:
    """Count records with |quotient| below each bound and split them by sign.

    ``records`` holds objects with a ``quotient`` attribute or plain integers.
    """
    qs = [getattr(r, "quotient", r) for r in records]
    hist = QuotientHistogram(bounds=tuple(bounds), counts=[sum(1 for q in qs if abs(q) < b) for b in bounds])
    for q in qs:
        if q > 0:
            hist.positive += 1
        elif q < 0:
            hist.negative += 1
        else:
            hist.zero += 1
    return hist
