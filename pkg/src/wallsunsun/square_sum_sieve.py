"""Primes p = a**2 + b**2 with p = 21, 29 mod 40, sieved in the (a, b) plane.

Such primes are 5 mod 8, so a is odd and b = 2 mod 4.  For a prime l = 1 mod 4
with v**2 = -1 mod l, l divides a**2 + b**2 exactly when a = +-v b (mod l), so
along a row of fixed b (or a column of fixed a) the pairs whose sum has the
factor l form two arithmetic progressions.  Every surviving pair comes with
its decomposition, which gives the quartic character of 5 for free.

Pairs with a common factor are dropped.  Sieving primes never cross their own
decomposition, so small primes survive.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from numba import njit

from .prime_sieve import auto_prime_limit, first_primes, small_primes
from .sqrt5 import SquareDecomposition, normalize


class Orientation(enum.Enum):
    ROW_BY_ROW = "rows"
    INVERTED = "columns"


@dataclass(frozen=True)
class RootsOfMinusOne:
    """Primes l = 1 mod 4 up to ``limit`` and a square root of -1 modulo each."""

    limit: int
    primes: np.ndarray
    roots: np.ndarray

    def __len__(self) -> int:
        return len(self.primes)

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.primes.tolist(), self.roots.tolist()))


@njit(cache=True)
def _powmod(b, e, m):
    r = 1
    b %= m
    while e:
        if e & 1:
            r = r * b % m
        b = b * b % m
        e >>= 1
    return r


@njit(cache=True)
def _roots_kernel(primes, out):
    # moduli stay below 2**31 so products fit in int64
    for i in range(primes.shape[0]):
        ell = primes[i]
        c = 2
        while _powmod(c, (ell - 1) // 2, ell) != ell - 1:
            c += 1
        v = _powmod(c, (ell - 1) // 4, ell)
        out[i] = min(v, ell - v)


def precompute_roots(limit: int) -> RootsOfMinusOne:
    """Table of v_l with v_l**2 = -1 mod l for every prime l = 1 mod 4, l <= limit."""
    if limit < 5:
        raise ValueError("limit must be at least 5")
    if limit >= 1 << 31:
        raise ValueError("sieve limit too large")
    p = small_primes(limit).primes
    p = np.ascontiguousarray(p[p % 4 == 1])
    roots = np.empty_like(p)
    _roots_kernel(p, roots)
    return RootsOfMinusOne(limit=int(limit), primes=p, roots=roots)


def roots_for_count(count: int) -> RootsOfMinusOne:
    """Roots for the primes = 1 mod 4 among the first ``count`` primes."""
    table = first_primes(max(count, 3))
    return precompute_roots(max(int(table.primes[-1]), 5))


@dataclass(frozen=True)
class Rectangle:
    """Odd a in [a_lo, a_hi] and b = 2 mod 4 in [b_lo, b_hi].

    ``b_lo`` is raised by 0..3 to the first value = 2 mod 4 and ``a_lo`` to
    the first odd value.
    """

    a_lo: int
    a_hi: int
    b_lo: int
    b_hi: int
    orientation: Orientation = Orientation.ROW_BY_ROW

    def __post_init__(self):
        object.__setattr__(self, "a_lo", max(self.a_lo, 1) | 1)
        b = max(self.b_lo, 2)
        object.__setattr__(self, "b_lo", b + (2 - b) % 4)
        if self.a_lo > self.a_hi or self.b_lo > self.b_hi:
            raise ValueError("empty rectangle")

    def a_values(self) -> range:
        return range(self.a_lo, self.a_hi + 1, 2)

    def b_values(self) -> range:
        return range(self.b_lo, self.b_hi + 1, 4)


@njit(cache=True)
def _sieve_line(flags, start, step, count, other, primes, roots):
    """Cross x = start + step*j (0 <= j < count) with x = +-v*other (mod l).

    ``step`` is 2 or 4, so its inverse mod l is ((l+1)/2)**(1 or 2).
    The position where x**2 + other**2 == l is left alone.
    """
    other2 = other * other
    for t in range(primes.shape[0]):
        ell = primes[t]
        inv2 = (ell + 1) // 2
        inv = inv2 if step == 2 else inv2 * inv2 % ell
        r = roots[t] * (other % ell) % ell
        for sgn in range(2):
            target = r if sgn == 0 else (ell - r) % ell
            j = (target - start % ell) % ell * inv % ell
            while j < count:
                x = start + step * j
                if other2 < ell and x * x + other2 == ell:
                    j += ell
                    continue
                flags[j] = 1
                j += ell
            if r == 0:
                break


@njit(cache=True)
def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def _annulus_kernel(lo, hi, primes, roots, out_p, out_a, out_b):
    """All sieve survivors a**2 + b**2 in [lo, hi) with p = +-1 mod 5, gcd(a, b) = 1."""
    n = 0
    b = 2
    while b * b < hi:
        b2 = b * b
        a_lo = 1
        if lo > b2 + 1:
            a_lo = int(math.sqrt(lo - b2))
            while a_lo * a_lo + b2 < lo:
                a_lo += 1
            while a_lo > 1 and (a_lo - 1) * (a_lo - 1) + b2 >= lo:
                a_lo -= 1
        a_lo |= 1
        a_hi = int(math.sqrt(hi - 1 - b2))
        while a_hi * a_hi + b2 > hi - 1:
            a_hi -= 1
        while (a_hi + 1) * (a_hi + 1) + b2 <= hi - 1:
            a_hi += 1
        if a_hi >= a_lo:
            count = (a_hi - a_lo) // 2 + 1
            flags = np.zeros(count, dtype=np.uint8)
            _sieve_line(flags, a_lo, 2, count, b, primes, roots)
            for j in range(count):
                if flags[j]:
                    continue
                a = a_lo + 2 * j
                p = a * a + b2
                r5 = p % 5
                if (r5 == 1 or r5 == 4) and _gcd(a, b) == 1:
                    if n == out_p.shape[0]:
                        return -1
                    out_p[n] = p
                    out_a[n] = a
                    out_b[n] = b
                    n += 1
        b += 4
    return n


def annulus_candidates(lo: int, hi: int, roots: RootsOfMinusOne
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(p, a, b) arrays, sorted by p, for sieve survivors p = a**2 + b**2 in [lo, hi).

    Only p = 21, 29 mod 40 appear.  Survivors are composite-free only when the
    roots table reaches sqrt(hi).
    """
    if hi <= lo:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z
    cap = max(1024, int((hi - lo) / 12) + 1024)
    while True:
        out = [np.empty(cap, dtype=np.int64) for _ in range(3)]
        n = _annulus_kernel(lo, hi, roots.primes, roots.roots, *out)
        if n >= 0:
            break
        cap *= 2
    order = np.argsort(out[0][:n], kind="stable")
    return tuple(arr[:n][order] for arr in out)


def sieve_rectangle(rect: Rectangle, roots: RootsOfMinusOne,
                    emit: Callable[[int, SquareDecomposition], None] | None = None
                    ) -> Iterator[tuple[int, SquareDecomposition]]:
    """Yield (p, decomposition) for every survivor p = 21, 29 mod 40 in the rectangle.

    Rows of fixed b are sieved for ``ROW_BY_ROW``; columns of fixed a for
    ``INVERTED``.  ``emit``, if given, is called for each yielded pair too.
    """
    primes, rts = roots.primes, roots.roots
    if rect.orientation is Orientation.ROW_BY_ROW:
        outer, inner, step = rect.b_values(), rect.a_values(), 2
    else:
        outer, inner, step = rect.a_values(), rect.b_values(), 4
    count = len(inner)
    for fixed in outer:
        flags = np.zeros(count, dtype=np.uint8)
        _sieve_line(flags, inner.start, step, count, fixed, primes, rts)
        for j in np.flatnonzero(flags == 0):
            x = inner.start + step * int(j)
            a, b = (x, fixed) if step == 2 else (fixed, x)
            p = a * a + b * b
            if p % 40 not in (21, 29) or math.gcd(a, b) != 1:
                continue
            dec = normalize(p, a, b)
            if emit is not None:
                emit(p, dec)
            yield p, dec


def default_roots(max_p: int) -> RootsOfMinusOne:
    """Roots table sized by the automatic prime count for numbers up to ``max_p``."""
    return roots_for_count(auto_prime_limit(max(max_p, 100)))
