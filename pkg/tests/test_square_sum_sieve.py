import math

import numpy as np
import pytest
import sympy

from wallsunsun.prime_sieve import primes_in_class
from wallsunsun.sqrt5 import normalize
from wallsunsun.square_sum_sieve import (Orientation, Rectangle, _sieve_line, annulus_candidates,
                                         default_roots, precompute_roots, sieve_rectangle)


def test_roots_examples():
    roots = precompute_roots(30).as_dict()
    assert roots[5] in (2, 3) and roots[5] ** 2 % 5 == 4
    assert roots[13] in (5, 8) and 5 * 5 % 13 == 12
    assert roots[29] in (12, 17) and 12 * 12 % 29 == 28
    assert set(roots) == {5, 13, 17, 29}


def test_roots_complete():
    roots = precompute_roots(10**5)
    want = [p for p in sympy.primerange(5, 10**5 + 1) if p % 4 == 1]
    assert roots.primes.tolist() == want
    assert all(v * v % p == p - 1 for p, v in zip(roots.primes.tolist(), roots.roots.tolist()))


def test_rectangle_example():
    rect = Rectangle(1, 9, 2, 10)
    got = {p: (d.a, d.b) for p, d in sieve_rectangle(rect, precompute_roots(100))}
    assert {29, 101, 109, 149} <= set(got)
    assert 29 % 40 == 29 and 101 % 40 == 21
    assert sorted(got) == [29, 61, 101, 109, 149, 181]
    for p, (a, b) in got.items():
        assert a * a + b * b == p and normalize(p, a, b) == normalize(p, b, a)


def test_rectangle_emit_callback():
    seen = []
    out = list(sieve_rectangle(Rectangle(1, 9, 2, 10), precompute_roots(100), emit=lambda p, d: seen.append(p)))
    assert seen == [p for p, _ in out]


def test_325_crossed_by_5():
    # 15**2 + 10**2 = 325 = 5**2 * 13; with v_5 = 2, 15 = 2 * 10 (mod 5)
    roots = precompute_roots(20)
    flags = np.zeros(1, dtype=np.uint8)
    _sieve_line(flags, 15, 2, 1, 10, roots.primes, roots.roots)
    assert flags[0] == 1
    assert (2 * 10 - 15) % 5 == 0


def test_orientations_agree():
    roots = precompute_roots(200)
    for rect in [(1, 301, 2, 250), (101, 999, 30, 600)]:
        a = {p for p, _ in sieve_rectangle(Rectangle(*rect), roots)}
        b = {p for p, _ in sieve_rectangle(Rectangle(*rect, orientation=Orientation.INVERTED), roots)}
        assert a == b and a


def test_completeness_5e6_6e6():
    lo, hi = 5 * 10**6, 6 * 10**6
    side = math.isqrt(hi) + 1
    roots = precompute_roots(side)
    got = {}
    for p, dec in sieve_rectangle(Rectangle(0, side, 0, side), roots):
        if lo <= p <= hi:
            got[p] = dec
    want = set(primes_in_class(lo, hi + 1, 21, 40).tolist()) | set(primes_in_class(lo, hi + 1, 29, 40).tolist())
    assert set(got) == want
    for p, d in got.items():
        assert d.a**2 + d.b**2 == p


def test_crossing_soundness():
    roots = precompute_roots(300)
    for b in range(2, 200, 4):
        count = 200
        flags = np.zeros(count, dtype=np.uint8)
        _sieve_line(flags, 1, 2, count, b, roots.primes, roots.roots)
        for j in np.flatnonzero(flags):
            a = 1 + 2 * int(j)
            n = a * a + b * b
            hits = [l for l in roots.primes.tolist() if n % l == 0 and n != l]
            assert hits
            # pairs with l | gcd(a, b) are crossed too; then l**2 | n, never a prime
            assert any(a % l or b % l for l in hits) or math.gcd(a, b) > 1


def test_annulus_matches_class_primes():
    lo, hi = 10**9, 10**9 + 10**6
    roots = precompute_roots(math.isqrt(hi) + 1)
    ps, as_, bs = annulus_candidates(lo, hi, roots)
    assert np.all(ps[:-1] < ps[1:])
    assert np.array_equal(as_**2 + bs**2, ps)
    want = np.union1d(primes_in_class(lo, hi, 21, 40), primes_in_class(lo, hi, 29, 40))
    assert np.array_equal(ps, want)


def test_annulus_small_table_is_superset():
    lo, hi = 10**10, 10**10 + 2 * 10**6
    ps, _, _ = annulus_candidates(lo, hi, precompute_roots(1000))
    want = np.union1d(primes_in_class(lo, hi, 21, 40), primes_in_class(lo, hi, 29, 40))
    assert np.all(np.isin(want, ps))
    assert len(ps) < 3 * len(want)


def test_default_roots_and_empty_rectangle():
    assert len(default_roots(10**8)) > 0
    with pytest.raises(ValueError):
        Rectangle(10, 5, 2, 10)
    assert annulus_candidates(10, 10, precompute_roots(10))[0].size == 0
