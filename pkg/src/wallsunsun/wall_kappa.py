"""Wall numbers (Pisano periods), entry exponents and the exceptionality tests.

kappa(l) is the period of F_k mod l.  For a prime p other than 2 and 5,
kappa(p) divides p - 1 when p = +-1 mod 5 and divides 2p + 2 (but not p + 1)
when p = +-2 mod 5; p is exceptional (a Wall-Sun-Sun prime) when p**2 divides
F_{kappa(p)}, equivalently F_{p-1} or F_{2p+2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy
from numba import njit

from .core_arith import signed_residue
from .fib_engine import fib_mod, fib_pair_mod

KAPPA_TABLE = {2: 3, 5: 20}
BRUTE_FORCE_LIMIT = 10**7
Q_STATS_LIMIT = 2 * 10**7


@dataclass(frozen=True)
class WallNumber:
    l: int
    kappa: int


@dataclass(frozen=True)
class EntryExponent:
    p: int
    e: int


@dataclass(frozen=True)
class QuotientRecord:
    """``quotient`` is ``(F_index mod p**2)/p`` as a signed representative."""

    p: int
    quotient: int
    index: int

    @property
    def exceptional(self) -> bool:
        return self.quotient == 0


@njit(cache=True)
def _kappa_kernel(l):
    a, b = 0, 1 % l
    k = 0
    while True:
        a, b = b, (a + b) % l
        k += 1
        if a == 0 and b == 1 % l:
            return k


@njit(cache=True)
def _kappa_all(n, out):
    for l in range(2, n + 1):
        out[l] = _kappa_kernel(l)


def kappa_bruteforce(l: int) -> WallNumber:
    """Period of F_k mod l by iterating the pair (F_k, F_{k+1})."""
    if l < 2:
        raise ValueError("the modulus must be at least 2")
    if l > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force is limited to l <= {BRUTE_FORCE_LIMIT}")
    return WallNumber(l, int(_kappa_kernel(l)))


def kappa_table(n: int) -> np.ndarray:
    """kappa(l) for 0 <= l <= n (entries 0 and 1 are 0)."""
    out = np.zeros(n + 1, dtype=np.int64)
    _kappa_all(n, out)
    return out


def fib_class_bound(p: int) -> int:
    """p - 1 for p = +-1 mod 5, else 2p + 2: always a multiple of kappa(p)."""
    return p - 1 if p % 5 in (1, 4) else 2 * p + 2


def is_period(d: int, m: int) -> bool:
    return fib_pair_mod(d, m) == (0, 1 % m)


def kappa_prime(p: int, factor_table: dict[int, int] | None = None) -> WallNumber:
    """kappa(p) by descending from p - 1 or 2p + 2 through its prime factors.

    ``factor_table`` is the factorisation of that bound as {prime: exponent};
    it is computed when omitted.
    """
    if p in KAPPA_TABLE:
        return WallNumber(p, KAPPA_TABLE[p])
    bound = fib_class_bound(p)
    if factor_table is None:
        factor_table = sympy.factorint(bound)
    if math.prod(q**e for q, e in factor_table.items()) != bound:
        raise ValueError(f"factor table does not multiply out to {bound}")
    d = bound
    for q in factor_table:
        while d % q == 0 and is_period(d // q, p):
            d //= q
    if not is_period(d, p):
        raise ValueError(f"{bound} is not a period modulo {p}; is {p} prime?")
    return WallNumber(p, d)


def entry_exponent(p: int) -> EntryExponent:
    """Largest e with p**e | F_{kappa(p)}."""
    k = kappa_prime(p).kappa
    e = 1
    while fib_pair_mod(k, p ** (e + 1))[0] == 0:
        e += 1
    return EntryExponent(p, e)


def is_exceptional(p: int) -> bool:
    """p**2 | F_{kappa(p)}."""
    k = kappa_prime(p).kappa
    return fib_pair_mod(k, p * p)[0] == 0


def is_exceptional_fast(p: int, scheme: str = "fiblucas") -> tuple[bool, QuotientRecord]:
    """Test p**2 | F_{p-1} (p = +-1 mod 5) or p**2 | F_{2p+2} with one Fibonacci evaluation."""
    if p in (2, 5) or p < 2:
        raise ValueError("p must be a prime other than 2 and 5")
    k = fib_class_bound(p)
    f = fib_mod(p * p, k, scheme)
    if f % p:
        raise ValueError(f"{p} does not divide F_{k}; {p} is not prime")
    rec = QuotientRecord(p=p, quotient=signed_residue(f // p, p), index=k)
    return rec.exceptional, rec


def q_ratio(p: int) -> int:
    """Q(p) = bound / kappa(p) with the bound p - 1 or 2p + 2."""
    return fib_class_bound(p) // kappa_prime(p).kappa


# ---------------------------------------------------------------------------
# checks of Wall's theorem on a range


@dataclass
class WallReport:
    max_l: int
    multiplicative: bool = True
    even: bool = True
    six_l_bound: bool = True
    equality_set: list[int] = field(default_factory=list)
    prime_powers: bool = True
    lemma: bool = True
    lemma_instances: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.multiplicative and self.even and self.six_l_bound and self.prime_powers
                and self.lemma and not self.violations)


def _is_two_times_power_of_five(l: int) -> bool:
    """l = 2 * 5**n with n >= 1 (kappa(2) = 3, so l = 2 is not an equality case)."""
    if l % 2 or l < 10:
        return False
    l //= 2
    while l % 5 == 0:
        l //= 5
    return l == 1


def verify_wall_theorem(max_l: int, lemma_primes: tuple[int, ...] = (3, 7, 11, 13, 17)) -> WallReport:
    """Check the structure theorem for kappa on [2, max_l] against brute force.

    * kappa(l1 l2) = lcm(kappa(l1), kappa(l2)) for coprime l1, l2;
    * kappa(l) is even for l >= 3;
    * kappa(l) <= 6 l with equality exactly for l = 2 * 5**n, n >= 1;
    * kappa(p**n) = kappa(p) p**(n-1) (no exceptional primes in range);
    * for l a multiple of kappa(p) with p**n | F_l, kappa(p**n) divides l.
    """
    if max_l > 10**4:
        raise ValueError("verification is limited to max_l <= 10**4")
    kap = kappa_table(max_l)
    rep = WallReport(max_l=max_l)
    for l1 in range(2, max_l + 1):
        for l2 in range(l1 + 1, max_l // l1 + 1):
            if math.gcd(l1, l2) == 1 and kap[l1 * l2] != math.lcm(int(kap[l1]), int(kap[l2])):
                rep.multiplicative = False
                rep.violations.append(f"lcm fails for {l1}*{l2}")
    for l in range(2, max_l + 1):
        k = int(kap[l])
        if l >= 3 and k % 2:
            rep.even = False
            rep.violations.append(f"kappa({l}) = {k} is odd")
        if k > 6 * l:
            rep.six_l_bound = False
            rep.violations.append(f"kappa({l}) = {k} > 6l")
        if k == 6 * l:
            rep.equality_set.append(l)
            if not _is_two_times_power_of_five(l):
                rep.six_l_bound = False
                rep.violations.append(f"kappa({l}) = 6l but {l} is not 2*5^n")
    for l in range(2, max_l + 1):
        if _is_two_times_power_of_five(l) and kap[l] != 6 * l:
            rep.six_l_bound = False
            rep.violations.append(f"kappa({l}) != 6l")
    for p in sympy.primerange(2, max_l + 1):
        pn, n = p * p, 2
        while pn <= max_l:
            if kap[pn] != kap[p] * p ** (n - 1):
                rep.prime_powers = False
                rep.violations.append(f"kappa({p}^{n}) != kappa({p}) * {p}^{n - 1}")
            pn *= p
            n += 1
    for p in lemma_primes:
        if p == 2:
            continue
        kp = kappa_bruteforce(p).kappa
        for n in (1, 2, 3):
            pn = p**n
            if pn > BRUTE_FORCE_LIMIT:
                break
            kpn = kappa_bruteforce(pn).kappa
            for l in range(kp, max_l + 1, kp):
                if fib_pair_mod(l, pn)[0] == 0:
                    rep.lemma_instances += 1
                    if l % kpn:
                        rep.lemma = False
                        rep.violations.append(f"{p}^{n} | F_{l} but kappa({pn}) does not divide {l}")
    return rep


# ---------------------------------------------------------------------------
# Q(p) statistics


@njit(cache=True)
def _spf_sieve(n):
    spf = np.zeros(n + 1, dtype=np.int32)
    for i in range(2, n + 1):
        if spf[i] == 0:
            spf[i] = i
            if i * i <= n:
                for j in range(i * i, n + 1, i):
                    if spf[j] == 0:
                        spf[j] = i
    return spf


@njit(cache=True)
def _fib_pair_small(k, m):
    a, b = 0, 1 % m
    nb = 0
    x = k
    while x:
        x >>= 1
        nb += 1
    for i in range(nb - 1, -1, -1):
        a, b = a * ((2 * b - a) % m) % m, (a * a + b * b) % m
        if (k >> i) & 1:
            a, b = b, (a + b) % m
    return a, b


@njit(cache=True)
def _q_stats_kernel(bound, spf, counts):
    """counts[c, 0] = #primes, counts[c, 1] = #(Q = 1), c = p mod 4 // 2, for p = +-2 mod 5."""
    for p in range(3, bound + 1):
        if spf[p] != p:
            continue
        r5 = p % 5
        if r5 != 2 and r5 != 3:
            continue
        c = 1 if p % 4 == 3 else 0
        counts[c, 0] += 1
        n = 2 * p + 2
        x = n
        full = True
        while x > 1:
            q = spf[x]
            while x % q == 0:
                x //= q
            f, g = _fib_pair_small(n // q, p)
            if f == 0 and g == 1:
                full = False
                break
        if full:
            counts[c, 1] += 1


@dataclass(frozen=True)
class QStats:
    bound: int
    primes_3mod4: int
    q1_3mod4: int
    primes_1mod4: int
    q1_1mod4: int

    def by_class(self) -> dict[str, tuple[int, int]]:
        return {"3mod4": (self.primes_3mod4, self.q1_3mod4), "1mod4": (self.primes_1mod4, self.q1_1mod4)}


def compute_q_stats(bound: int) -> QStats:
    """Count primes p = +-2 mod 5 below ``bound`` by p mod 4, and those with Q(p) = 1.

    Q(p) = 1 means kappa(p) = 2p + 2, i.e. no proper divisor (2p+2)/q is a period.
    """
    if bound > Q_STATS_LIMIT:
        raise ValueError(f"bound is limited to {Q_STATS_LIMIT}")
    spf = _spf_sieve(2 * bound + 2)
    counts = np.zeros((2, 2), dtype=np.int64)
    _q_stats_kernel(bound, spf, counts)
    return QStats(bound=bound, primes_3mod4=int(counts[1, 0]), q1_3mod4=int(counts[1, 1]),
                  primes_1mod4=int(counts[0, 0]), q1_1mod4=int(counts[0, 1]))
