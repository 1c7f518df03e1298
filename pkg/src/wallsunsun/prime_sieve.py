"""Segmented sieve of Eratosthenes over one residue class.

A window represents the numbers ``S(i) = start + residue + modulus * i`` for
``0 <= i < length``.  The modulus is 10, 20 or 40, so 2 and 5 never divide a
member; 3 gets its own pass, and every other sieving prime l crosses only the
members of its progression that are not already multiples of 3.

Sieving runs in two stages: the first ``small_prime_count`` primes are applied
segment by segment (the segment stays in cache while all of them pass over
it), then the remaining primes sweep the whole buffer once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

MODULI = (10, 20, 40)
DEFAULT_SEGMENT = 1 << 21  # candidates; 256 KiB of flag bits
DEFAULT_SMALL_COUNT = 25_000
DEFAULT_CAPACITY = 250_000_000


def _eratosthenes(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    is_p[4::2] = False
    for q in range(3, math.isqrt(limit) + 1, 2):
        if is_p[q]:
            is_p[q * q :: 2 * q] = False
    return np.flatnonzero(is_p).astype(np.int64)


@dataclass(frozen=True)
class SmallPrimeTable:
    """All primes up to ``limit`` in ascending order.

    ``sieving`` drops 2, 3 and 5: 2 and 5 divide every class modulus and 3 is
    handled by its own pass.
    """

    limit: int
    primes: np.ndarray = field(repr=False)

    @property
    def sieving(self) -> np.ndarray:
        return self.primes[self.primes >= 7]

    def __len__(self) -> int:
        return len(self.primes)

    def first(self, count: int) -> "SmallPrimeTable":
        """Table restricted to the first ``count`` primes."""
        sub = self.primes[:count]
        return SmallPrimeTable(limit=int(sub[-1]) if len(sub) else 1, primes=sub)


def small_primes(limit: int) -> SmallPrimeTable:
    """All primes <= ``limit`` (plain sieve of Eratosthenes)."""
    return SmallPrimeTable(limit=int(limit), primes=_eratosthenes(int(limit)))


def first_primes(count: int) -> SmallPrimeTable:
    """Table holding the first ``count`` primes."""
    if count <= 0:
        return SmallPrimeTable(limit=1, primes=np.zeros(0, dtype=np.int64))
    # p_n < n (ln n + ln ln n) for n >= 6
    n = max(count, 6)
    bound = int(n * (math.log(n) + math.log(math.log(n)))) + 10
    return small_primes(bound).first(count)


def auto_prime_limit(first_p: int) -> int:
    """Number of sieving primes for a window starting at ``first_p``.

    ``floor(sqrt(x) / log(sqrt(x)))``: about the count of primes below
    ``sqrt(first_p)``, which leaves very few composites in the sieve.
    """
    if first_p < 100:
        raise ValueError("auto_prime_limit expects first_p >= 100")
    r = math.sqrt(first_p)
    return int(r / math.log(r))


def complete_prime_limit(max_value: int) -> int:
    """Largest prime bound that makes a sieve up to ``max_value`` exact."""
    return math.isqrt(max_value)


@dataclass(frozen=True)
class ResidueClassWindow:
    """Numbers ``start + residue + modulus * i`` for ``0 <= i < length``."""

    start: int
    residue: int
    modulus: int
    length: int

    def __post_init__(self):
        if self.modulus not in MODULI:
            raise ValueError(f"modulus must be one of {MODULI}, got {self.modulus}")
        if self.start % self.modulus:
            raise ValueError(f"start {self.start} is not a multiple of {self.modulus}")
        if math.gcd(self.residue, self.modulus) != 1:
            raise ValueError(f"residue {self.residue} shares a factor with {self.modulus}")
        if self.length < 0:
            raise ValueError("negative window length")

    @property
    def base(self) -> int:
        return self.start + self.residue

    def value(self, i: int) -> int:
        return self.base + self.modulus * i

    @property
    def max_value(self) -> int:
        return self.value(self.length - 1) if self.length else self.base

    @classmethod
    def covering(cls, lo: int, hi: int, residue: int, modulus: int) -> "ResidueClassWindow":
        """Smallest window of the class whose members cover ``[lo, hi)``.

        Members below ``lo`` may be included at the front; callers filter.
        """
        residue %= modulus
        start = (lo // modulus) * modulus
        if start + residue < lo:
            first = start + residue + modulus
        else:
            first = start + residue
        if first >= hi:
            return cls(start=start, residue=residue, modulus=modulus, length=0)
        length = (hi - 1 - first) // modulus + 1
        start = first - residue
        return cls(start=start, residue=residue, modulus=modulus, length=length)


@dataclass
class SieveBuffer:
    """Bit flags for a window: a set bit marks a crossed-out member."""

    window: ResidueClassWindow
    flags: np.ndarray = field(repr=False)
    prime_limit: int
    segment_len: int = DEFAULT_SEGMENT
    small_prime_count: int = DEFAULT_SMALL_COUNT

    def crossed(self, i: int) -> bool:
        return bool((self.flags[i >> 3] >> (i & 7)) & 1)

    def survivor_indices(self) -> np.ndarray:
        return _survivors(self.flags, self.window.length)

    def survivors(self) -> np.ndarray:
        w = self.window
        return w.base + w.modulus * self.survivor_indices()

    def count(self) -> int:
        return int(_count_clear(self.flags, self.window.length))


# ---------------------------------------------------------------------------
# kernels


@njit(cache=True)
def _start_state(base, modulus, length, primes, inv_mod, i0, step_a, step_b):
    """First crossing index and the skip-3 step pair for every prime."""
    b3 = base % 3
    m3 = modulus % 3
    for t in range(primes.shape[0]):
        ell = primes[t]
        # S(i0) = 0 mod ell
        i = ((ell - base % ell) % ell) * inv_mod[t] % ell
        # skip members divisible by 3 (3 has its own pass)
        if (b3 + m3 * (i % 3)) % 3 == 0:
            i += ell
        # of the next two members of the progression, which one is a multiple of 3
        j1 = (b3 + m3 * ((i + ell) % 3)) % 3
        if j1 == 0:
            step_a[t] = 2 * ell
            step_b[t] = ell
        else:
            step_a[t] = ell
            step_b[t] = 2 * ell
        i0[t] = i


@njit(cache=True)
def _cross_range(flags, i0, step_a, step_b, t, end):
    """Cross indices of prime t below ``end``, advancing its state."""
    i = i0[t]
    a = step_a[t]
    b = step_b[t]
    while i < end:
        flags[i >> 3] |= np.uint8(1 << (i & 7))
        i += a
        if i >= end:
            a, b = b, a
            break
        flags[i >> 3] |= np.uint8(1 << (i & 7))
        i += b
    i0[t] = i
    step_a[t] = a
    step_b[t] = b


@njit(cache=True)
def _sieve_kernel(flags, base, modulus, length, primes, inv_mod, segment_len, small_count):
    n = primes.shape[0]
    i0 = np.empty(n, dtype=np.int64)
    step_a = np.empty(n, dtype=np.int64)
    step_b = np.empty(n, dtype=np.int64)
    _start_state(base, modulus, length, primes, inv_mod, i0, step_a, step_b)

    # multiples of 3
    i = 0
    while i < 3 and (base + modulus * i) % 3 != 0:
        i += 1
    while i < length:
        flags[i >> 3] |= np.uint8(1 << (i & 7))
        i += 3

    n_small = min(small_count, n)
    if segment_len > 0:
        # stage 1: segments, all small primes per segment
        lo = 0
        while lo < length:
            hi = min(lo + segment_len, length)
            for t in range(n_small):
                _cross_range(flags, i0, step_a, step_b, t, hi)
            lo = hi
    else:
        for t in range(n_small):
            _cross_range(flags, i0, step_a, step_b, t, length)
    # stage 2: big primes over the whole buffer
    for t in range(n_small, n):
        if i0[t] < length:
            _cross_range(flags, i0, step_a, step_b, t, length)


@njit(cache=True)
def _count_clear(flags, length):
    c = 0
    for i in range(length):
        if not (flags[i >> 3] >> (i & 7)) & 1:
            c += 1
    return c


@njit(cache=True)
def _survivors(flags, length):
    out = np.empty(_count_clear(flags, length), dtype=np.int64)
    c = 0
    for byte in range((length + 7) >> 3):
        f = flags[byte]
        if f == 0xFF:
            continue
        for bit in range(8):
            i = (byte << 3) + bit
            if i < length and not (f >> bit) & 1:
                out[c] = i
                c += 1
    return out


def _inverses(modulus: int, primes: np.ndarray) -> np.ndarray:
    return np.array([pow(modulus, -1, int(q)) for q in primes], dtype=np.int64)


@dataclass(frozen=True)
class _PreparedTable:
    primes: np.ndarray
    inv: np.ndarray


_PREPARED: dict[tuple[int, int, int], _PreparedTable] = {}


def _prepared(table: SmallPrimeTable, modulus: int) -> _PreparedTable:
    key = (id(table.primes), len(table.primes), modulus)
    hit = _PREPARED.get(key)
    if hit is None:
        primes = np.ascontiguousarray(table.sieving, dtype=np.int64)
        hit = _PreparedTable(primes=primes, inv=_inverses(modulus, primes))
        _PREPARED.clear()
        _PREPARED[key] = hit
    return hit


def sieve_window(window: ResidueClassWindow, table: SmallPrimeTable,
                 segment_len: int = DEFAULT_SEGMENT,
                 small_prime_count: int = DEFAULT_SMALL_COUNT) -> SieveBuffer:
    """Cross out every member with a prime factor in ``{3} + table.sieving``.

    A cleared flag means the member has no prime factor up to the table's
    largest prime (the sieving primes themselves are crossed too).
    ``segment_len=0`` disables the cache segmentation.
    """
    if window.length > DEFAULT_CAPACITY * 4:
        raise ValueError(f"window of {window.length} members is too large for one buffer")
    prep = _prepared(table, window.modulus)
    flags = np.zeros((window.length + 7) // 8, dtype=np.uint8)
    if window.length:
        _sieve_kernel(flags, window.base, window.modulus, window.length, prep.primes, prep.inv,
                      int(segment_len), int(small_prime_count))
    limit = int(table.primes[-1]) if len(table.primes) else 1
    return SieveBuffer(window=window, flags=flags, prime_limit=max(limit, 3),
                       segment_len=segment_len, small_prime_count=small_prime_count)


def primes_in_class(lo: int, hi: int, residue: int, modulus: int,
                    table: SmallPrimeTable | None = None) -> np.ndarray:
    """Sieve survivors of the class in ``[lo, hi)``, plus the sieving primes themselves.

    With the default (complete) table the result is exactly the primes of the
    class in the range.
    """
    window = ResidueClassWindow.covering(lo, hi, residue, modulus)
    if window.length == 0:
        return np.zeros(0, dtype=np.int64)
    if table is None:
        table = small_primes(complete_prime_limit(window.max_value))
    surv = sieve_window(window, table).survivors()
    surv = surv[(surv >= lo) & (surv < hi)]
    top = int(table.primes[-1]) if len(table.primes) else 0
    if lo <= top:
        small = table.primes[(table.primes >= lo) & (table.primes < hi) & (table.primes % modulus == residue % modulus)]
        surv = np.union1d(small, surv)
    return surv
