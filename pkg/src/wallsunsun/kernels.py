"""Batch kernels used by the interval search.

Each kernel takes an array of candidates and fills an output array, so the
per-prime cost is free of interpreter overhead.  All arithmetic modulo p and
p**2 goes through :mod:`wallsunsun._mont3`.

Quotient convention: for a candidate p the kernels return
``(F_k mod p**2) / p`` in ``[0, p)`` with ``k = p - 1`` when p = +-1 mod 5
and ``k = 2p + 2`` otherwise, or -1 when p does not divide ``F_k`` (which
only happens for composites that leaked through the sieve).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from . import _mont3 as M3
from ._mont3 import U0, U1

FIB_LUCAS = 0
TWO_SQUARES = 1
FORSTER = 2

SCHEMES = {"fiblucas": FIB_LUCAS, "twosquares": TWO_SQUARES, "forster": FORSTER}


def prefix_tables(bits: int) -> np.ndarray:
    """Exact (F_{j-1}, F_j, V_j) for every j < 2**bits, as 3-limb rows.

    Returned shape is (2**bits, 3, 3): [j, which, limb].
    """
    size = 1 << bits
    out = np.zeros((max(size, 2), 3, 3), dtype=np.uint64)
    f_prev, f = 1, 0  # F_{-1}, F_0
    for j in range(size):
        v = f_prev * 2 + f  # V_j = F_{j-1} + F_{j+1} = 2 F_{j-1} + F_j
        for which, value in enumerate((f_prev, f, v)):
            for limb in range(3):
                out[j, which, limb] = (value >> (32 * limb)) & 0xFFFFFFFF
        f_prev, f = f, f_prev + f
    return out


@njit(cache=True)
def _row(table, j, which):
    return (table[j, which, 0], table[j, which, 1], table[j, which, 2])


@njit(cache=True)
def _bitlen64(k):
    n = 0
    while k != U0:
        k >>= U1
        n += 1
    return n


@njit(cache=True)
def fib_mont(k, scheme, m, ninv, one, r2, prefix_bits, table):
    """F_k in Montgomery form modulo m (canonical), by the selected doubling scheme.

    With ``prefix_bits > 1`` the state for the top ``prefix_bits`` bits of k is
    taken from ``table`` (exact values) instead of being recomputed.
    """
    k = np.uint64(k)
    zero = (U0, U0, U0)
    if k == U0:
        return zero
    nb = _bitlen64(k)
    two = M3.addmod(one, one, m)
    if prefix_bits > 1 and nb >= prefix_bits:
        start = nb - prefix_bits
        j = np.int64(k >> np.uint64(start))
        f = M3.to_mont(_row(table, j, 1), m, ninv, r2)
        if scheme == FIB_LUCAS:
            g = M3.to_mont(_row(table, j, 2), m, ninv, r2)
        else:
            g = M3.to_mont(_row(table, j, 0), m, ninv, r2)
        odd = (j & 1) == 1
        b = start - 1
    else:
        f = one
        g = one if scheme == FIB_LUCAS else zero
        odd = True
        b = nb - 2

    while b >= 0:
        bit = ((k >> np.uint64(b)) & U1) == U1
        if scheme == FIB_LUCAS:
            # (F, V) at index i -> index 2i or 2i+1
            fv = M3.mmul(f, g, m, ninv)
            vv = M3.msqr(g, m, ninv)
            if bit:
                h = M3.halfmod(M3.addmod(fv, vv, m), m)
                # + (-1)^(i+1)
                if odd:
                    f = M3.addmod(h, one, m)
                else:
                    f = M3.submod(h, one, m)
                g = M3.addmod(f, M3.addmod(fv, fv, m), m)
                odd = True
            else:
                if odd:
                    g = M3.addmod(vv, two, m)
                else:
                    g = M3.submod(vv, two, m)
                f = fv
                odd = False
        elif scheme == TWO_SQUARES:
            # (F_i, F_{i-1}); only squarings
            s1 = M3.msqr(f, m, ninv)
            s2 = M3.msqr(g, m, ninv)
            t = M3.addmod(s1, s1, m)
            t = M3.addmod(t, t, m)
            t = M3.submod(t, s2, m)
            if odd:
                f21 = M3.submod(t, two, m)
            else:
                f21 = M3.addmod(t, two, m)
            f2m1 = M3.addmod(s1, s2, m)
            f2 = M3.submod(f21, f2m1, m)
            if bit:
                f, g = f21, f2
                odd = True
            else:
                f, g = f2, f2m1
                odd = False
        else:
            # Forster: (F_i, F_{i-1})
            xx = M3.msqr(f, m, ninv)
            xy = M3.mmul(f, g, m, ninv)
            x2 = M3.addmod(xx, M3.addmod(xy, xy, m), m)
            y2 = M3.addmod(xx, M3.msqr(g, m, ninv), m)
            if bit:
                f, g = M3.addmod(x2, y2, m), x2
            else:
                f, g = x2, y2
        b -= 1
    return f


@njit(cache=True)
def _fib_lucas_pair(k, m, ninv, one):
    """(F_k, V_k) in Montgomery form, plain FibLucas doubling."""
    k = np.uint64(k)
    if k == U0:
        return (U0, U0, U0), M3.addmod(one, one, m)
    two = M3.addmod(one, one, m)
    f = one
    g = one
    odd = True
    b = _bitlen64(k) - 2
    while b >= 0:
        bit = ((k >> np.uint64(b)) & U1) == U1
        fv = M3.mmul(f, g, m, ninv)
        vv = M3.msqr(g, m, ninv)
        if bit:
            h = M3.halfmod(M3.addmod(fv, vv, m), m)
            if odd:
                f = M3.addmod(h, one, m)
            else:
                f = M3.submod(h, one, m)
            g = M3.addmod(f, M3.addmod(fv, fv, m), m)
            odd = True
        else:
            if odd:
                g = M3.addmod(vv, two, m)
            else:
                g = M3.submod(vv, two, m)
            f = fv
            odd = False
        b -= 1
    return f, g


@njit(cache=True)
def fib_mod_batch(ks, mods, scheme, prefix_bits, table, out):
    """out[i] = F_{ks[i]} mod mods[i] (3-limb rows) for arbitrary odd moduli."""
    for i in range(ks.shape[0]):
        m = (mods[i, 0], mods[i, 1], mods[i, 2])
        ninv, one, r2 = M3.setup(m)
        f = fib_mont(ks[i], scheme, m, ninv, one, r2, prefix_bits, table)
        r = M3.from_mont(f, m, ninv)
        out[i, 0] = r[0]
        out[i, 1] = r[1]
        out[i, 2] = r[2]


@njit(cache=True)
def fib_lucas_batch(ks, mods, out):
    """out[i] = (F_k mod m, V_k mod m) as two 3-limb rows."""
    for i in range(ks.shape[0]):
        m = (mods[i, 0], mods[i, 1], mods[i, 2])
        ninv, one, r2 = M3.setup(m)
        f, v = _fib_lucas_pair(ks[i], m, ninv, one)
        f = M3.from_mont(f, m, ninv)
        v = M3.from_mont(v, m, ninv)
        for limb in range(3):
            out[i, 0, limb] = f[limb]
            out[i, 1, limb] = v[limb]


@njit(cache=True)
def _square_of(p):
    sq = M3.mul_wide(M3.from_u64(p), M3.from_u64(p))
    return (sq[0], sq[1], sq[2])


@njit(cache=True)
def direct_quotients(ps, scheme, prefix_bits, table, out):
    """Quotient by direct Fibonacci computation modulo p**2."""
    for i in range(ps.shape[0]):
        p = np.int64(ps[i])
        r5 = p % 5
        if r5 == 1 or r5 == 4:
            k = p - 1
        else:
            k = 2 * p + 2
        m = _square_of(p)
        ninv, one, r2 = M3.setup(m)
        f = fib_mont(k, scheme, m, ninv, one, r2, prefix_bits, table)
        out[i] = M3.exact_div_small(M3.from_mont(f, m, ninv), p)


@njit(cache=True)
def _sqrt5_tonelli(p, mp, ninv, one, r2):
    """Shanks' square root of 5 modulo p (Montgomery form), p = 1 mod 8."""
    q = np.uint64(p - 1)
    s = 0
    while (q & U1) == U0:
        q >>= U1
        s += 1
    neg_one = M3.sub(mp, one)
    z = np.int64(2)
    while True:
        zm = M3.small_mont(z, one, mp)
        e = M3.mpow(zm, np.uint64((p - 1) // 2), one, mp, ninv)
        if M3.eq(e, neg_one):
            break
        # Euler's criterion fails or no non-residue turns up: p is composite
        if not M3.eq(e, one) or z > 1000:
            return (U0, U0, U0), False
        z += 1
    five = M3.small_mont(5, one, mp)
    c = M3.mpow(zm, q, one, mp, ninv)
    t = M3.mpow(five, q, one, mp, ninv)
    r = M3.mpow(five, (q + U1) >> U1, one, mp, ninv)
    mm = s
    while not M3.eq(t, one):
        i = 0
        tt = t
        while not M3.eq(tt, one):
            tt = M3.msqr(tt, mp, ninv)
            i += 1
            if i == mm:
                # 5 is not a square: p was not a prime = +-1 mod 5
                return (U0, U0, U0), False
        b = c
        for _ in range(mm - i - 1):
            b = M3.msqr(b, mp, ninv)
        mm = i
        c = M3.msqr(b, mp, ninv)
        t = M3.mmul(t, c, mp, ninv)
        r = M3.mmul(r, b, mp, ninv)
    return r, True


@njit(cache=True)
def golden_quotients(ps, quartic, out):
    """Quotient via r**(p-1) mod p**2 with r the golden ratio, p = +-1 mod 5.

    ``quartic[i]`` is +1 / -1 when the quartic character of 5 modulo p is
    already known (from a sum-of-two-squares decomposition) and 0 otherwise;
    it only matters for p = 5 mod 8.
    """
    for i in range(ps.shape[0]):
        p = np.int64(ps[i])
        mp = M3.from_u64(p)
        ninv_p, one_p, r2_p = M3.setup(mp)
        five_p = M3.small_mont(5, one_p, mp)

        # square root of 5 modulo p
        ok = True
        if p % 4 == 3:
            w = M3.mpow(five_p, np.uint64((p + 1) // 4), one_p, mp, ninv_p)
        elif p % 8 == 5:
            cls = quartic[i]
            if cls == 0:
                e = M3.mpow(five_p, np.uint64((p - 1) // 4), one_p, mp, ninv_p)
                cls = 1 if M3.eq(e, one_p) else -1
            if cls == 1:
                w = M3.mpow(five_p, np.uint64((p + 3) // 8), one_p, mp, ninv_p)
            else:
                ten = M3.addmod(five_p, five_p, mp)
                twenty = M3.addmod(ten, ten, mp)
                w = M3.mmul(ten, M3.mpow(twenty, np.uint64((p - 5) // 8), one_p, mp, ninv_p), mp, ninv_p)
        else:
            w, ok = _sqrt5_tonelli(p, mp, ninv_p, one_p, r2_p)
        if not ok or not M3.eq(M3.msqr(w, mp, ninv_p), five_p):
            out[i] = -1
            continue

        # 1/5 and 1/10 modulo p without a general inversion
        if p % 5 == 1:
            inv5 = (4 * p + 1) // 5
        else:
            inv5 = (p + 1) // 5
        inv5_p = M3.to_mont(M3.from_u64(inv5), mp, ninv_p, r2_p)
        inv10_p = M3.halfmod(inv5_p, mp)
        # y = 1/(2w) = w/10 modulo p, as a plain residue
        y = M3.from_mont(M3.mmul(w, inv10_p, mp, ninv_p), mp, ninv_p)
        w_plain = M3.from_mont(w, mp, ninv_p)

        # Hensel lift of w to p**2, then r = (1 + w)/2
        m = _square_of(p)
        ninv, one, r2 = M3.setup(m)
        wm = M3.to_mont(w_plain, m, ninv, r2)
        five = M3.small_mont(5, one, m)
        c = M3.submod(M3.msqr(wm, m, ninv), five, m)
        wm = M3.submod(wm, M3.mmul(c, M3.to_mont(y, m, ninv, r2), m, ninv), m)
        r = M3.halfmod(M3.addmod(one, wm, m), m)
        t = M3.from_mont(M3.mpow(r, np.uint64(p - 1), one, m, ninv), m, ninv)
        if t[0] == U1 and t[1] == U0 and t[2] == U0:
            out[i] = 0
            continue
        u = M3.exact_div_small(M3.sub(t, (U1, U0, U0)), p)
        if u < 0:
            out[i] = -1
            continue
        # F_{p-1} = (t - 1/t)/sqrt5 = 2 p u / w, so the quotient is 2 u w / 5 mod p
        qm = M3.mmul(M3.to_mont(M3.from_u64(u), mp, ninv_p, r2_p), w, mp, ninv_p)
        qm = M3.mmul(qm, inv5_p, mp, ninv_p)
        qm = M3.addmod(qm, qm, mp)
        q = M3.from_mont(qm, mp, ninv_p)
        out[i] = np.int64(q[0] | (q[1] << np.uint64(32)))


@njit(cache=True)
def mont_ops_batch(xs, ys, mods, out):
    """from_mont(mont_mul(to_mont(x), to_mont(y))) rows, for oracle tests."""
    for i in range(xs.shape[0]):
        m = (mods[i, 0], mods[i, 1], mods[i, 2])
        ninv, one, r2 = M3.setup(m)
        x = M3.to_mont((xs[i, 0], xs[i, 1], xs[i, 2]), m, ninv, r2)
        y = M3.to_mont((ys[i, 0], ys[i, 1], ys[i, 2]), m, ninv, r2)
        r = M3.from_mont(M3.mmul(x, y, m, ninv), m, ninv)
        s = M3.from_mont(M3.msqr(x, m, ninv), m, ninv)
        for limb in range(3):
            out[i, 0, limb] = r[limb]
            out[i, 1, limb] = s[limb]


@njit(cache=True)
def mont_pow_batch(bases, exps, mods, out):
    for i in range(bases.shape[0]):
        m = (mods[i, 0], mods[i, 1], mods[i, 2])
        ninv, one, r2 = M3.setup(m)
        x = M3.to_mont((bases[i, 0], bases[i, 1], bases[i, 2]), m, ninv, r2)
        r = M3.from_mont(M3.mpow(x, exps[i], one, m, ninv), m, ninv)
        for limb in range(3):
            out[i, limb] = r[limb]
