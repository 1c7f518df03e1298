import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from wallsunsun.fib_engine import fib_pair_mod
from wallsunsun.prime_sieve import small_primes
from wallsunsun.sqrt5 import (QuarticClass, SquareDecomposition, golden_power_test, golden_ratio,
                              hensel_lift_sqrt, normalize, quartic_class, sqrt5_3mod4, sqrt5_5mod8,
                              sqrt5_mod_p, tonelli_shanks, two_squares)

PRIMES = small_primes(10**6).primes
SPLIT = [int(p) for p in PRIMES if p % 5 in (1, 4)]
SPLIT_1MOD4 = [p for p in SPLIT if p % 4 == 1]

PATTERNS = {
    5: {QuarticClass.QUARTIC_RESIDUE: {(a, 10) for a in (3, 7, 11, 19)},
        QuarticClass.QUADRATIC_ONLY: {(15, b) for b in (2, 6, 14, 18)}},
    1: {QuarticClass.QUARTIC_RESIDUE: {(a, 0) for a in (1, 9, 13, 17)},
        QuarticClass.QUADRATIC_ONLY: {(5, b) for b in (4, 8, 12, 16)}},
}


def test_sqrt5_3mod4_examples():
    assert pow(5, 3, 11) == 4 and sqrt5_3mod4(11) == 4
    assert pow(5, 5, 19) == 9 and sqrt5_3mod4(19) == 9
    with pytest.raises(ValueError):
        sqrt5_3mod4(13)


def test_quartic_class_examples():
    dec, cls = quartic_class(29)
    assert (dec.a, dec.b) == (-5, 2) and (dec.a % 20, dec.b % 20) == (15, 2)
    assert cls is QuarticClass.QUADRATIC_ONLY and pow(5, 7, 29) == 28
    dec, cls = quartic_class(101)
    assert (dec.a, dec.b) == (-1, 10) and (dec.a % 20, dec.b % 20) == (19, 10)
    assert cls is QuarticClass.QUARTIC_RESIDUE and pow(5, 25, 101) == 1
    dec, cls = quartic_class(61)
    assert (dec.a, dec.b) == (-5, 6)
    assert cls is QuarticClass.QUADRATIC_ONLY and pow(5, 15, 61) == 60


def test_quartic_class_rejects_3mod4():
    with pytest.raises(ValueError):
        quartic_class(11)


def test_sqrt5_5mod8_examples():
    # both roots are valid; the smaller representative is returned
    w = sqrt5_5mod8(101, QuarticClass.QUARTIC_RESIDUE)
    assert pow(5, 13, 101) == 56 and w in (56, 101 - 56) and w == 45
    assert w * w % 101 == 5
    w = sqrt5_5mod8(29, QuarticClass.QUADRATIC_ONLY)
    assert 10 * 20**3 % 29 == 18 and w in (18, 11) and w == 11
    w = sqrt5_5mod8(61, QuarticClass.QUADRATIC_ONLY)
    assert w * w % 61 == 5


def test_sqrt5_5mod8_wrong_class():
    with pytest.raises(ValueError):
        sqrt5_5mod8(101, QuarticClass.QUADRATIC_ONLY)
    with pytest.raises(ValueError):
        sqrt5_5mod8(29, QuarticClass.QUARTIC_RESIDUE)


def test_tonelli_shanks_examples():
    w = tonelli_shanks(41)
    assert w in (13, 28) and 13 * 13 % 41 == 5
    assert tonelli_shanks(11) in (sqrt5_3mod4(11), 11 - sqrt5_3mod4(11))
    with pytest.raises(ValueError):
        tonelli_shanks(13)


def test_hensel_lift_examples():
    assert hensel_lift_sqrt(11, 4) == 48 and 48 * 48 % 121 == 5
    w = hensel_lift_sqrt(19, 9)
    assert w % 19 == 9 and w * w % 361 == 5
    assert hensel_lift_sqrt(19, w % 19) == w
    with pytest.raises(ValueError):
        hensel_lift_sqrt(11, 3)


def test_golden_ratio_examples():
    g = golden_ratio(11)
    assert g.r == 85 and (85 * 85 - 85 - 1) == 59 * 121
    g = golden_ratio(19)
    assert (g.r * g.r - g.r - 1) % 361 == 0
    with pytest.raises(ValueError):
        golden_ratio(7)


def test_golden_power_test_examples():
    assert golden_power_test(11) == (False, 5)
    assert fib_pair_mod(18, 361)[0] == 2584 % 361 == 57
    assert golden_power_test(19) == (False, 3)
    # spot values from the quotient list
    assert golden_power_test(29)[1] % 29 == 26
    assert golden_power_test(1677209) == (False, 1)
    with pytest.raises(ValueError):
        golden_power_test(2003)  # 2003 = 3 mod 5: no square root of 5


def test_golden_ratio_all_split_primes():
    for p in SPLIT:
        g = golden_ratio(p)
        m = p * p
        assert g.w * g.w % m == 5
        assert (g.r * g.r - g.r - 1) % m == 0
        assert (g.r + g.s_conj) % m == 1


def test_quartic_class_vs_exponentiation_and_unified_theorem():
    for p in SPLIT_1MOD4:
        dec, cls = quartic_class(p)
        assert dec.a**2 + dec.b**2 == p and dec.b > 0 and dec.b % 2 == 0
        e = pow(5, (p - 1) // 4, p)
        assert e in (1, p - 1)
        assert (cls is QuarticClass.QUARTIC_RESIDUE) == (e == 1)
        assert (dec.b % 5 == 0) == (dec.a % 5 != 0) == (e == 1)
        assert (dec.a % 20, dec.b % 20) in PATTERNS[p % 8][cls]


def test_two_squares():
    for p in SPLIT_1MOD4[:2000] + [int(sympy.prevprime(10**14 - 10**6 * k)) for k in range(1, 40)]:
        if p % 4 != 1:
            continue
        a, b = two_squares(p)
        assert a * a + b * b == p


def test_square_decomposition_validation():
    with pytest.raises(ValueError):
        SquareDecomposition(p=29, a=3, b=2)
    assert normalize(29, 2, 5) == SquareDecomposition(p=29, a=-5, b=2)


def test_sqrt5_mod_p_all_methods():
    for p in SPLIT[:5000]:
        w = sqrt5_mod_p(p)
        assert w * w % p == 5 and w <= p - w


def test_golden_power_equivalence_below_1e6():
    # is_exceptional <=> p**2 | F_{p-1}, and the quotient matches the direct computation
    for p in SPLIT:
        flag, q = golden_power_test(p)
        f = fib_pair_mod(p - 1, p * p)[0]
        assert f % p == 0
        assert flag == (f == 0)
        assert (q - f // p) % p == 0 and -p / 2 < q <= p / 2


@settings(max_examples=200, deadline=None)
@given(st.integers(10**6, 10**13))
def test_golden_ratio_property(n):
    p = int(sympy.nextprime(n))
    while p % 5 not in (1, 4):
        p = int(sympy.nextprime(p))
    g = golden_ratio(p)
    assert (g.r * g.r - g.r - 1) % (p * p) == 0
