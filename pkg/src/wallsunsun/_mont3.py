"""Compiled Montgomery arithmetic on three 32-bit limbs.

A number is a tuple ``(x0, x1, x2)`` of uint64 values each below 2**32, least
significant first.  Moduli satisfy ``m <= 2**96 / 5`` which covers p**2 for
every p < 10**14.  Residues are kept canonical (< m) between operations: the
lazy ``R**n/5`` bound of :mod:`wallsunsun.core_arith` does not survive the
additions that follow each product in the Fibonacci doubling formulas when
m is much smaller than the radix.

Everything here is ``@njit``; all integer literals are explicitly uint64 so
numba never promotes a mixed int64/uint64 expression to float.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK = np.uint64(0xFFFFFFFF)
SH = np.uint64(32)
U0 = np.uint64(0)
U1 = np.uint64(1)
U2 = np.uint64(2)
U31 = np.uint64(31)
TWO32 = np.uint64(1 << 32)

INV8 = np.array([pow(i, -1, 256) if i & 1 else 0 for i in range(256)], dtype=np.uint64)


@njit(cache=True)
def from_u64(x):
    x = np.uint64(x)
    return (x & MASK, x >> SH, U0)


@njit(cache=True)
def is_zero(a):
    return a[0] == U0 and a[1] == U0 and a[2] == U0


@njit(cache=True)
def eq(a, b):
    return a[0] == b[0] and a[1] == b[1] and a[2] == b[2]


@njit(cache=True)
def ge(a, b):
    if a[2] != b[2]:
        return a[2] > b[2]
    if a[1] != b[1]:
        return a[1] > b[1]
    return a[0] >= b[0]


@njit(cache=True)
def add(a, b):
    t = a[0] + b[0]
    r0 = t & MASK
    t = a[1] + b[1] + (t >> SH)
    r1 = t & MASK
    t = a[2] + b[2] + (t >> SH)
    return (r0, r1, t & MASK)


@njit(cache=True)
def sub(a, b):
    """a - b for a >= b."""
    t = (a[0] + TWO32) - b[0]
    r0 = t & MASK
    borrow = U1 - (t >> SH)
    t = (a[1] + TWO32) - b[1] - borrow
    r1 = t & MASK
    borrow = U1 - (t >> SH)
    t = (a[2] + TWO32) - b[2] - borrow
    return (r0, r1, t & MASK)


@njit(cache=True)
def shr1(a):
    return (
        (a[0] >> U1) | ((a[1] & U1) << U31),
        (a[1] >> U1) | ((a[2] & U1) << U31),
        a[2] >> U1,
    )


@njit(cache=True)
def addmod(a, b, m):
    s = add(a, b)
    if ge(s, m):
        s = sub(s, m)
    return s


@njit(cache=True)
def submod(a, b, m):
    if ge(a, b):
        return sub(a, b)
    return sub(add(a, m), b)


@njit(cache=True)
def halfmod(a, m):
    if a[0] & U1:
        a = add(a, m)
    return shr1(a)


@njit(cache=True)
def mul_wide(a, b):
    """Schoolbook 3x3 limb product -> 6 limbs."""
    a0, a1, a2 = a
    b0, b1, b2 = b
    t = a0 * b0
    r0 = t & MASK
    t = a0 * b1 + (t >> SH)
    r1 = t & MASK
    t = a0 * b2 + (t >> SH)
    r2 = t & MASK
    r3 = t >> SH

    t = a1 * b0 + r1
    r1 = t & MASK
    t = a1 * b1 + r2 + (t >> SH)
    r2 = t & MASK
    t = a1 * b2 + r3 + (t >> SH)
    r3 = t & MASK
    r4 = t >> SH

    t = a2 * b0 + r2
    r2 = t & MASK
    t = a2 * b1 + r3 + (t >> SH)
    r3 = t & MASK
    t = a2 * b2 + r4 + (t >> SH)
    r4 = t & MASK
    r5 = t >> SH
    return (r0, r1, r2, r3, r4, r5)


@njit(cache=True)
def sqr_wide(a):
    """Square via three cross products (doubled) plus three diagonal squares."""
    a0, a1, a2 = a
    t = a0 * a1
    o1 = t & MASK
    t = a0 * a2 + (t >> SH)
    o2 = t & MASK
    t = a1 * a2 + (t >> SH)
    o3 = t & MASK
    o4 = t >> SH

    d1 = (o1 << U1) & MASK
    d2 = ((o2 << U1) | (o1 >> U31)) & MASK
    d3 = ((o3 << U1) | (o2 >> U31)) & MASK
    d4 = ((o4 << U1) | (o3 >> U31)) & MASK
    d5 = o4 >> U31

    t = a0 * a0
    r0 = t & MASK
    t = d1 + (t >> SH)
    r1 = t & MASK
    c = t >> SH
    s = a1 * a1
    t = d2 + (s & MASK) + c
    r2 = t & MASK
    t = d3 + (s >> SH) + (t >> SH)
    r3 = t & MASK
    c = t >> SH
    s = a2 * a2
    t = d4 + (s & MASK) + c
    r4 = t & MASK
    t = d5 + (s >> SH) + (t >> SH)
    r5 = t & MASK
    return (r0, r1, r2, r3, r4, r5)


@njit(cache=True)
def redc(t, m, ninv):
    """REDC of a 6-limb value below m * R**3, folded into [0, m)."""
    t0, t1, t2, t3, t4, t5 = t
    m0, m1, m2 = m
    for _ in range(3):
        q = (t0 * ninv) & MASK
        c = (t0 + q * m0) >> SH
        s = t1 + q * m1 + c
        t1 = s & MASK
        s = t2 + q * m2 + (s >> SH)
        t2 = s & MASK
        s = t3 + (s >> SH)
        t3 = s & MASK
        s = t4 + (s >> SH)
        t4 = s & MASK
        t5 = t5 + (s >> SH)
        t0, t1, t2, t3, t4, t5 = t1, t2, t3, t4, t5, U0
    r = (t0, t1, t2)
    if ge(r, m):
        r = sub(r, m)
    return r


@njit(cache=True)
def mmul(a, b, m, ninv):
    return redc(mul_wide(a, b), m, ninv)


@njit(cache=True)
def msqr(a, m, ninv):
    return redc(sqr_wide(a), m, ninv)


@njit(cache=True)
def from_mont(a, m, ninv):
    return redc((a[0], a[1], a[2], U0, U0, U0), m, ninv)


@njit(cache=True)
def word_inverse_neg(m0):
    """-(m0**-1) mod 2**32: table lookup then two Hensel lifts (8 -> 16 -> 32)."""
    inv = INV8[m0 & np.uint64(0xFF)]
    inv = (U2 * inv - inv * inv * m0) & np.uint64(0xFFFF)
    inv = (U2 * inv - inv * inv * m0) & MASK
    return (TWO32 - inv) & MASK


@njit(cache=True)
def bit_length(a):
    if a[2] != U0:
        hi, base = a[2], 64
    elif a[1] != U0:
        hi, base = a[1], 32
    else:
        hi, base = a[0], 0
    n = 0
    while hi != U0:
        hi >>= U1
        n += 1
    return base + n


@njit(cache=True)
def setup(m):
    """Return (ninv, one_M, r2) for the odd modulus m (3 limbs, m <= R**3/5)."""
    ninv = word_inverse_neg(m[0])
    # R**3 mod m by doubling from the largest power of two below m
    nb = bit_length(m)
    k = nb - 1
    one = (U0, U0, U0)
    if k < 32:
        one = (U1 << np.uint64(k), U0, U0)
    elif k < 64:
        one = (U0, U1 << np.uint64(k - 32), U0)
    else:
        one = (U0, U0, U1 << np.uint64(k - 64))
    for _ in range(96 - k):
        one = addmod(one, one, m)
    # R**6 mod m: square the Montgomery form of 2 up to 2**64, times 2**32
    x = addmod(one, one, m)
    for _ in range(5):
        x = msqr(x, m, ninv)
    x32 = x
    x = msqr(x, m, ninv)
    r2 = mmul(x, x32, m, ninv)
    return ninv, one, r2


@njit(cache=True)
def to_mont(a, m, ninv, r2):
    """Montgomery form of an arbitrary 3-limb value a (a * r2 < m * R**3)."""
    return mmul(a, r2, m, ninv)


@njit(cache=True)
def mpow(base, e, one, m, ninv):
    """base**e for a Montgomery-form base and uint64 exponent, window 2**3."""
    e = np.uint64(e)
    if e == U0:
        return one
    b2 = msqr(base, m, ninv)
    b3 = mmul(base, b2, m, ninv)
    b5 = mmul(b3, b2, m, ninv)
    b7 = mmul(b5, b2, m, ninv)
    nb = 0
    x = e
    while x != U0:
        x >>= U1
        nb += 1
    r = one
    started = False
    i = nb - 1
    while i >= 0:
        if ((e >> np.uint64(i)) & U1) == U0:
            if started:
                r = msqr(r, m, ninv)
            i -= 1
            continue
        j = i - 2
        if j < 0:
            j = 0
        while ((e >> np.uint64(j)) & U1) == U0:
            j += 1
        w = (e >> np.uint64(j)) & ((U1 << np.uint64(i - j + 1)) - U1)
        if w == U1:
            t = base
        elif w == np.uint64(3):
            t = b3
        elif w == np.uint64(5):
            t = b5
        else:
            t = b7
        if started:
            for _ in range(i - j + 1):
                r = msqr(r, m, ninv)
            r = mmul(r, t, m, ninv)
        else:
            r = t
            started = True
        i = j - 1
    return r


@njit(cache=True)
def to_float(a):
    return float(a[0]) + float(a[1]) * 4294967296.0 + float(a[2]) * 18446744073709551616.0


@njit(cache=True)
def exact_div_small(a, p):
    """a / p for a 3-limb a and p < 2**47 when p | a and the quotient < 2**63.

    Returns -1 when p does not divide a.  The float estimate is off by at
    most one; the candidate quotients are checked with an exact product.
    """
    pf = float(p)
    q0 = np.int64(to_float(a) / pf + 0.5)
    pl = from_u64(p)
    for dq in (0, -1, 1):
        q = q0 + dq
        if q < 0:
            continue
        prod = mul_wide(from_u64(q), pl)
        if prod[3] == U0 and prod[4] == U0 and prod[5] == U0 and eq((prod[0], prod[1], prod[2]), a):
            return q
    return np.int64(-1)


@njit(cache=True)
def small_mont(k, one, m):
    """Montgomery form of a small non-negative integer by repeated doubling."""
    r = (U0, U0, U0)
    addend = one
    k = np.uint64(k)
    while k != U0:
        if k & U1:
            r = addmod(r, addend, m)
        addend = addmod(addend, addend, m)
        k >>= U1
    return r
