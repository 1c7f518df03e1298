"""Exceptional primes for the real quadratic fields Q(sqrt d).

With eps the fundamental unit, an odd prime p is exceptional for d when
eps**n = 1 in O_K/(p**2), where n = p - 1 if d is a square mod p, 2p + 2 if
it is not, and p(p - 1) when p divides d (ramified).  For d = 5 this is the
Wall-Sun-Sun condition, since the golden ratio is the fundamental unit.

Since p is odd, O_K/(p**k) is Z/p**k [X]/(X**2 - d) and elements are stored
as x + y sqrt d even when eps has half-integer coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy
from numba import njit

from . import _mont3 as M3
from ._mont3 import U0, U1
from .prime_sieve import small_primes

MAX_D = 101


@dataclass(frozen=True)
class QuadFieldContext:
    """Fundamental unit (x + y sqrt d)/2 if ``half`` else x + y sqrt d, of norm ``norm``."""

    d: int
    x: int
    y: int
    norm: int
    half: bool

    def __str__(self) -> str:
        body = f"{self.x} + {self.y}*sqrt({self.d})"
        return f"({body})/2" if self.half else body


@dataclass(frozen=True)
class QuadRingElement:
    """x + y sqrt d modulo ``modulus``."""

    x: int
    y: int
    d: int
    modulus: int

    def __mul__(self, other: "QuadRingElement") -> "QuadRingElement":
        m = self.modulus
        return QuadRingElement((self.x * other.x + self.d * self.y * other.y) % m,
                               (self.x * other.y + self.y * other.x) % m, self.d, m)

    def is_one(self) -> bool:
        return self.x % self.modulus == 1 % self.modulus and self.y % self.modulus == 0

    def norm(self) -> int:
        return (self.x * self.x - self.d * self.y * self.y) % self.modulus


@dataclass(frozen=True)
class QuadExceptional:
    d: int
    p: int
    ramified: bool
    cube: bool

    def line(self) -> str:
        return f"d={self.d} p={self.p} ramified={int(self.ramified)} cube={int(self.cube)}"


def is_squarefree(d: int) -> bool:
    return d > 1 and all(e == 1 for e in sympy.factorint(d).values())


def fundamental_unit(d: int) -> QuadFieldContext:
    """Fundamental unit from the continued fraction of omega.

    omega = (1 + sqrt d)/2 for d = 1 mod 4, else sqrt d.  Each convergent h/k
    gives the element h - k * conj(omega); the first of norm +-1 is the
    fundamental unit.
    """
    if not is_squarefree(d):
        raise ValueError(f"{d} is not square-free")
    if d > MAX_D:
        raise ValueError(f"d is limited to {MAX_D}")
    half = d % 4 == 1
    P, Q = (1, 2) if half else (0, 1)
    s = math.isqrt(d)
    h, h_prev = 1, 0
    k, k_prev = 0, 1
    while True:
        a = (P + s) // Q
        h, h_prev = a * h + h_prev, h
        k, k_prev = a * k + k_prev, k
        if half:
            x, y = 2 * h - k, k
            n4 = x * x - d * y * y
            if n4 in (4, -4):
                return QuadFieldContext(d, x, y, n4 // 4, True)
        else:
            x, y = h, k
            n = x * x - d * y * y
            if n in (1, -1):
                return QuadFieldContext(d, x, y, n, False)
        P = a * Q - P
        Q = (d - P * P) // Q


def pell_unit(d: int, y_max: int = 10**6) -> QuadFieldContext:
    """Fundamental unit by scanning y: the least y > 0 with d y**2 -+ c a square.

    c = 4 for d = 1 mod 4 (half-integer units), else 1; independent of the
    continued fraction, used as a cross-check.
    """
    if not is_squarefree(d):
        raise ValueError(f"{d} is not square-free")
    half = d % 4 == 1
    c = 4 if half else 1
    y = np.arange(1, y_max + 1, dtype=np.int64)
    best = None
    for sign in (-1, 1):
        t = d * y * y + sign * c
        r = np.sqrt(np.maximum(t, 0).astype(np.float64)).round().astype(np.int64)
        hits = np.flatnonzero((r * r == t) & (t > 0))
        if len(hits):
            j = int(hits[0])
            cand = (int(y[j]), int(r[j]), sign)
            if best is None or cand[0] < best[0] or (cand[0] == best[0] and cand[1] < best[1]):
                best = cand
    if best is None:
        raise ValueError(f"no unit with y <= {y_max} for d={d}")
    yy, xx, norm = best
    return QuadFieldContext(d, xx, yy, norm, half)


def _unit_mod(ctx: QuadFieldContext, modulus: int) -> QuadRingElement:
    x, y = ctx.x, ctx.y
    if ctx.half:
        inv2 = (modulus + 1) // 2  # modulus is odd
        x, y = x * inv2, y * inv2
    return QuadRingElement(x % modulus, y % modulus, ctx.d, modulus)


def quad_pow(ctx: QuadFieldContext, p: int, k: int, exponent: int) -> QuadRingElement:
    """eps**exponent in O_K/(p**k) by square and multiply."""
    if p == 2 or p % 2 == 0:
        raise ValueError("p must be an odd prime")
    if k < 1:
        raise ValueError("k must be positive")
    if exponent < 0:
        raise ValueError("negative exponent")
    m = p**k
    base = _unit_mod(ctx, m)
    result = QuadRingElement(1 % m, 0, ctx.d, m)
    e = exponent
    while e:
        if e & 1:
            result = result * base
        base = base * base
        e >>= 1
    return result


def unit_exponent(d: int, p: int) -> int:
    """p - 1, 2p + 2 or p(p - 1) according to the Legendre symbol (d/p)."""
    if d % p == 0:
        return p * (p - 1)
    return p - 1 if pow(d, (p - 1) // 2, p) == 1 else 2 * p + 2


def is_exceptional_quad(ctx: QuadFieldContext, p: int, k: int = 2) -> bool:
    """eps**n = 1 mod p**k with n from :func:`unit_exponent`."""
    return quad_pow(ctx, p, k, unit_exponent(ctx.d, p)).is_one()


@njit(cache=True)
def _limbs_of_power(p, k):
    r = M3.from_u64(p)
    base = r
    for _ in range(k - 1):
        w = M3.mul_wide(r, base)
        r = (w[0], w[1], w[2])
    return r


@njit(cache=True)
def _quad_batch(primes, d, ux, uy, half, k, out):
    """out[i] = 1 when eps**n = 1 mod primes[i]**k (n by the Legendre symbol of d)."""
    for i in range(primes.shape[0]):
        p = np.int64(primes[i])
        if d % p == 0:
            e = np.uint64(p * (p - 1))
        else:
            mp = M3.from_u64(p)
            ninv_p, one_p, r2_p = M3.setup(mp)
            leg = M3.mpow(M3.small_mont(d % p, one_p, mp), np.uint64((p - 1) // 2), one_p, mp, ninv_p)
            e = np.uint64(p - 1) if M3.eq(leg, one_p) else np.uint64(2 * p + 2)
        m = _limbs_of_power(p, k)
        ninv, one, r2 = M3.setup(m)
        x = M3.to_mont(M3.from_u64(ux), m, ninv, r2)
        y = M3.to_mont(M3.from_u64(uy), m, ninv, r2)
        if half:
            x = M3.halfmod(x, m)
            y = M3.halfmod(y, m)
        dm = M3.small_mont(d, one, m)
        rx, ry = one, (U0, U0, U0)
        nb = 0
        t = e
        while t:
            t >>= U1
            nb += 1
        for b in range(nb - 1, -1, -1):
            # square: (rx^2 + d ry^2, 2 rx ry)
            xx = M3.msqr(rx, m, ninv)
            yy = M3.mmul(M3.msqr(ry, m, ninv), dm, m, ninv)
            xy = M3.mmul(rx, ry, m, ninv)
            rx = M3.addmod(xx, yy, m)
            ry = M3.addmod(xy, xy, m)
            if (e >> np.uint64(b)) & U1:
                a1 = M3.mmul(rx, x, m, ninv)
                a2 = M3.mmul(M3.mmul(ry, y, m, ninv), dm, m, ninv)
                b1 = M3.mmul(rx, y, m, ninv)
                b2 = M3.mmul(ry, x, m, ninv)
                rx = M3.addmod(a1, a2, m)
                ry = M3.addmod(b1, b2, m)
        out[i] = 1 if M3.eq(rx, one) and M3.is_zero(ry) else 0


def exceptional_flags(ctx: QuadFieldContext, primes: np.ndarray, k: int = 2) -> np.ndarray:
    """Boolean array: is each odd prime exceptional for ctx modulo p**k (compiled)."""
    primes = np.ascontiguousarray(primes, dtype=np.int64)
    if len(primes) and (primes.min() < 3 or primes.max() ** k >= 2**96 // 5):
        raise ValueError("primes must be odd and p**k below 2**96/5")
    if ctx.x >= 1 << 63 or ctx.y >= 1 << 63:
        raise ValueError("unit coordinates too large for the compiled path")
    out = np.zeros(len(primes), dtype=np.uint8)
    _quad_batch(primes, ctx.d, ctx.x, ctx.y, ctx.half, k, out)
    return out.astype(bool)


def search_quadfield(d: int, bound: int, cube_only: bool = False) -> list[QuadExceptional]:
    """All odd primes p <= bound exceptional for Q(sqrt d), with ramification and mod-p**3 flags."""
    if bound > 10**7:
        raise ValueError("bound is limited to 10**7")
    ctx = fundamental_unit(d)
    primes = small_primes(bound).primes
    primes = primes[primes >= 3]
    out = []
    for p in primes[exceptional_flags(ctx, primes, 2)].tolist():
        cube = is_exceptional_quad(ctx, p, 3)
        if cube_only and not cube:
            continue
        out.append(QuadExceptional(d=d, p=int(p), ramified=d % p == 0, cube=cube))
    return out


def squarefree_range(lo: int = 2, hi: int = MAX_D) -> list[int]:
    return [d for d in range(lo, hi + 1) if is_squarefree(d)]
