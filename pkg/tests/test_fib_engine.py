import random
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _limbs import from_row, to_rows
from wallsunsun import kernels
from wallsunsun.core_arith import MontgomeryContext
from wallsunsun.fib_engine import (SCHEMES, PrefixState, StalePrefixError, fib_exact, fib_lucas_mod, fib_mod,
                                   fib_mod_forster, fib_mod_two_squares, fib_pair_mod, lucas_exact)


def nu2(x):
    return (x & -x).bit_length() - 1


def test_forster_examples():
    assert fib_mod_forster(121, 0) == 0
    assert fib_mod_forster(121, 1) == 1
    assert fib_mod_forster(121, 10) == 55
    assert fib_mod_forster(169, 28) == 91
    assert 91 // 13 == 7


def test_forster_plain_path():
    for k in range(300):
        assert fib_mod_forster(1000, k, montgomery=False) == fib_exact(k) % 1000


def test_fib_lucas_examples():
    assert fib_lucas_mod(10**6 + 1, 10) == (55, 123)
    assert fib_lucas_mod(49, 1) == (1, 1)
    assert fib_lucas_mod(49, 16)[0] == 987 % 49 == 7


def test_fib_lucas_rejects_even():
    with pytest.raises(ValueError):
        fib_lucas_mod(10**6, 10)


def test_two_squares_examples():
    assert fib_mod_two_squares(1001, 12) == 144
    assert fib_mod_two_squares(1001, 0) == 0
    assert fib_mod_two_squares(289, 36) == 34


def test_exact_values():
    assert fib_exact(6) == 8
    assert fib_exact(7) == 13
    assert lucas_exact(0) == 2 and lucas_exact(1) == 1
    with pytest.raises(ValueError):
        fib_exact(10**4 + 1)


def test_scheme_agreement_all_k():
    rng = random.Random(1)
    mods = [rng.randrange(3, 10**28) | 1 for _ in range(50)]
    ctxs = [MontgomeryContext.for_modulus(m, width=64, n=2) for m in mods]
    for k in range(0, 10**4 + 1):
        f = fib_exact(k)
        i = k % 50
        m, ctx = mods[i], ctxs[i]
        want = f % m
        assert fib_mod(ctx, k, "forster") == want
        assert fib_mod(ctx, k, "fiblucas") == want
        assert fib_mod(ctx, k, "twosquares") == want


def test_scheme_agreement_all_moduli():
    rng = random.Random(2)
    for _ in range(50):
        m = rng.randrange(3, 10**28) | 1
        ctx = MontgomeryContext.for_modulus(m, width=64, n=2)
        for k in rng.sample(range(10**4 + 1), 40):
            vals = {fib_mod(ctx, k, s) for s in SCHEMES}
            assert vals == {fib_exact(k) % m}
            assert fib_lucas_mod(ctx, k)[1] == lucas_exact(k) % m


def test_prefix_zero_is_plain():
    rng = random.Random(3)
    for _ in range(1000):
        m = rng.randrange(3, 10**20) | 1
        k = rng.randrange(1, 1 << 60)
        s = rng.choice(SCHEMES)
        assert fib_mod(m, k, s, prefix_bits=0) == fib_pair_mod(k, m)[0]


@pytest.mark.parametrize("scheme", SCHEMES)
def test_prefix_shared_state(scheme):
    m = 10**18 + 9
    state = PrefixState.for_index(2**20, 7)
    for k in range(2**20, 2**20 + 1001):
        assert state.matches(k)
        assert fib_mod(m, k, scheme, prefix_bits=7, state=state) == fib_pair_mod(k, m)[0]


def test_prefix_change_detected():
    k0 = (1 << 30) + (1 << 24) - 1  # next index changes the 7-bit prefix
    state = PrefixState.for_index(k0, 7)
    m = 999999999989**2
    assert fib_mod(m, k0, prefix_bits=7, state=state) == fib_pair_mod(k0, m)[0]
    with pytest.raises(StalePrefixError):
        fib_mod(m, k0 + 1, prefix_bits=7, state=state)
    fresh = PrefixState.for_index(k0 + 1, 7)
    assert fresh.prefix != state.prefix
    assert fib_mod(m, k0 + 1, prefix_bits=7, state=fresh) == fib_pair_mod(k0 + 1, m)[0]


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 2**62), st.integers(1, 10**25).map(lambda x: 2 * x + 1), st.sampled_from(SCHEMES),
       st.integers(0, 7))
def test_prefix_property(k, m, scheme, bits):
    assert fib_mod(m, k, scheme, prefix_bits=bits) == fib_pair_mod(k, m)[0]


def test_kernel_schemes_match_python():
    rng = random.Random(4)
    n = 3000
    ks = np.array([rng.randrange(0, 1 << 50) for _ in range(n)], dtype=np.uint64)
    mods = [rng.randrange(3, 2**96 // 5) | 1 for _ in range(n)]
    table = kernels.prefix_tables(7)
    want = [fib_pair_mod(int(k), m)[0] for k, m in zip(ks, mods)]
    for scheme in kernels.SCHEMES.values():
        for bits in (0, 3, 7):
            out = np.zeros((n, 3), dtype=np.uint64)
            kernels.fib_mod_batch(ks, to_rows(mods), scheme, bits, table, out)
            assert [from_row(r) for r in out] == want


def test_cassini_identity():
    for k in range(1, 1001):
        assert fib_exact(k + 1) * fib_exact(k - 1) - fib_exact(k) ** 2 == (-1) ** k


def test_lucas_and_odd_index_identities():
    for k in range(1, 1001):
        assert lucas_exact(k) == fib_exact(k - 1) + fib_exact(k + 1)
        assert fib_exact(2 * k + 1) == fib_exact(k) ** 2 + fib_exact(k + 1) ** 2


@pytest.mark.parametrize("n", range(2, 13))
def test_two_adic_valuations(n):
    k = 3 * 2 ** (n - 1)
    assert nu2(fib_exact(k)) >= n + 1
    assert nu2(fib_exact(k + 1) - 1) == n


def test_two_adic_example():
    assert fib_exact(13) - 1 == 232 == 2**3 * 29


@pytest.mark.parametrize("p", [3, 5, 7])
def test_p_uplication(p):
    for k in range(21):
        f, v = fib_exact(k), lucas_exact(k)
        s = sum(comb(p, j) * 5 ** ((j - 1) // 2) * f**j * v ** (p - j) for j in range(1, p + 1, 2))
        assert s % 2 ** (p - 1) == 0
        assert s // 2 ** (p - 1) == fib_exact(p * k)


def test_p_uplication_example():
    assert (3 * 3 * 49 + 5 * 27) // 4 == 144 == fib_exact(12)


def test_fib_pair_mod_rejects_negative():
    with pytest.raises(ValueError):
        fib_pair_mod(-1, 7)
