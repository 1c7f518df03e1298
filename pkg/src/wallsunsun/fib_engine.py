"""Fibonacci and Lucas numbers modulo m by left-to-right doubling.

Three doubling schemes are provided, all over :mod:`wallsunsun.core_arith`:

* ``forster``: the pair (F_k, F_{k-1}) with
  F_{2k-1} = F_k^2 + F_{k-1}^2 and F_{2k} = F_k^2 + 2 F_k F_{k-1};
* ``fiblucas``: the pair (F_k, V_k), one product and one square per bit;
* ``twosquares``: the pair (F_k, F_{k-1}) using two squares per bit.

Values inside the loops are canonical Montgomery residues (below m), so the
additions and the halving in the Lucas formulas never leave the limb budget.
Exact integers for small k live in :func:`fib_exact` / :func:`lucas_exact`
and serve as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import core_arith as ca
from .core_arith import MontgomeryContext

SCHEMES = ("fiblucas", "twosquares", "forster")
DEFAULT_SCHEME = "fiblucas"
MAX_PREFIX_BITS = 7
EXACT_LIMIT = 10**4


def _context(ctx_or_m) -> MontgomeryContext:
    if isinstance(ctx_or_m, MontgomeryContext):
        return ctx_or_m
    return MontgomeryContext.for_modulus(int(ctx_or_m))


def _mul(ctx, x, y):
    return ca.canonical(ctx, ca.mont_mul(ctx, x, y))


def _sqr(ctx, x):
    return ca.canonical(ctx, ca.mont_sqr(ctx, x))


def _small(ctx, value: int) -> int:
    return ca.to_mont(ctx, value % ctx.m)


def _out(ctx, x_m: int) -> int:
    return ca.residue(ctx, x_m)


@dataclass(frozen=True)
class FibPairMod:
    """State of a doubling loop at index k.

    ``second`` is F_{k-1} for the Forster and two-squares schemes and V_k for
    the Fibonacci/Lucas scheme.  ``sign`` is (-1)**k.
    """

    k: int
    first: int
    second: int
    sign: int


# ---------------------------------------------------------------------------
# per-bit steps (Montgomery domain, canonical residues)


def _step_forster(ctx, f, g, bit):
    xx = _sqr(ctx, f)
    xy = _mul(ctx, f, g)
    x2 = ca.mont_add(ctx, xx, ca.mont_add(ctx, xy, xy))
    y2 = ca.mont_add(ctx, xx, _sqr(ctx, g))
    if bit:
        return ca.mont_add(ctx, x2, y2), x2
    return x2, y2


def _step_fiblucas(ctx, f, v, sign, bit, one, two):
    fv = _mul(ctx, f, v)
    vv = _sqr(ctx, v)
    if bit:
        h = ca.mont_half(ctx, ca.mont_add(ctx, fv, vv))
        # + (-1)**(k+1)
        f = ca.mont_sub(ctx, h, one) if sign > 0 else ca.mont_add(ctx, h, one)
        v = ca.mont_add(ctx, f, ca.mont_add(ctx, fv, fv))
        return f, v, -1
    v = ca.mont_sub(ctx, vv, two) if sign > 0 else ca.mont_add(ctx, vv, two)
    return fv, v, 1


def _step_two_squares(ctx, f, g, sign, bit, two):
    s1 = _sqr(ctx, f)
    s2 = _sqr(ctx, g)
    t = ca.mont_add(ctx, s1, s1)
    t = ca.mont_sub(ctx, ca.mont_add(ctx, t, t), s2)
    f21 = ca.mont_add(ctx, t, two) if sign > 0 else ca.mont_sub(ctx, t, two)
    f2m1 = ca.mont_add(ctx, s1, s2)
    f2 = ca.mont_sub(ctx, f21, f2m1)
    if bit:
        return f21, f2, -1
    return f2, f2m1, 1


def _run(ctx, k: int, scheme: str, state: FibPairMod | None, first_bit: int) -> FibPairMod:
    """Run the doubling loop over bits ``first_bit .. 0`` of k from ``state``."""
    one = ctx.one
    two = ca.mont_add(ctx, one, one)
    if state is None:
        f, g, sign = one, (one if scheme == "fiblucas" else 0), -1
    else:
        f, g, sign = state.first, state.second, state.sign
    for b in range(first_bit, -1, -1):
        bit = (k >> b) & 1
        if scheme == "fiblucas":
            f, g, sign = _step_fiblucas(ctx, f, g, sign, bit, one, two)
        elif scheme == "twosquares":
            f, g, sign = _step_two_squares(ctx, f, g, sign, bit, two)
        elif scheme == "forster":
            f, g = _step_forster(ctx, f, g, bit)
            sign = -sign if bit else 1
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
    return FibPairMod(k=k, first=f, second=g, sign=sign)


def _fib_pair(ctx, k: int, scheme: str) -> FibPairMod:
    if k < 0:
        raise ValueError("index must be non-negative")
    if k == 0:
        return FibPairMod(0, 0, ca.mont_add(ctx, ctx.one, ctx.one) if scheme == "fiblucas" else ctx.one, 1)
    return _run(ctx, k, scheme, None, k.bit_length() - 2)


# ---------------------------------------------------------------------------
# public schemes


def fib_mod_forster(ctx, k: int, montgomery: bool = True) -> int:
    """F_k mod m with the (F_k, F_{k-1}) doubling.

    ``ctx`` is a :class:`MontgomeryContext` or a plain modulus.  With
    ``montgomery=False`` the loop runs on ordinary residues with ``%``, which
    works for any m >= 1 and is kept for differential testing.
    """
    if not montgomery:
        m = ctx.m if isinstance(ctx, MontgomeryContext) else int(ctx)
        if k < 0:
            raise ValueError("index must be non-negative")
        if k == 0:
            return 0
        x, y = 1, 0
        for b in range(k.bit_length() - 2, -1, -1):
            xx = x * x
            x, y = (xx + 2 * x * y) % m, (xx + y * y) % m
            if (k >> b) & 1:
                x, y = (x + y) % m, x
        return x % m
    ctx = _context(ctx)
    return _out(ctx, _fib_pair(ctx, k, "forster").first)


def fib_lucas_mod(ctx, k: int) -> tuple[int, int]:
    """(F_k mod m, V_k mod m) for odd m: one product and one square per bit."""
    ctx = _context(ctx)
    st = _fib_pair(ctx, k, "fiblucas")
    return _out(ctx, st.first), _out(ctx, st.second)


def fib_mod_two_squares(ctx, k: int) -> int:
    """F_k mod m using only two squarings per bit."""
    ctx = _context(ctx)
    return _out(ctx, _fib_pair(ctx, k, "twosquares").first)


# ---------------------------------------------------------------------------
# prefix precomputation


@lru_cache(maxsize=None)
def _exact_triple(j: int) -> tuple[int, int, int]:
    """(F_j, F_{j-1}, V_j) as exact integers."""
    return fib_exact(j), fib_exact(j - 1) if j else 1, lucas_exact(j)


@dataclass(frozen=True)
class PrefixState:
    """Loop state after the leading ``bits`` binary digits of k.

    ``prefix`` is ``k >> (k.bit_length() - bits)``; the state is exact (no
    modulus), so one instance serves every modulus as long as the leading
    digits of k stay the same.  Recompute it with :meth:`for_index` when they
    change.
    """

    bits: int
    prefix: int
    fib: int
    fib_prev: int
    lucas: int

    @classmethod
    def for_index(cls, k: int, bits: int = MAX_PREFIX_BITS) -> "PrefixState":
        if not 1 <= bits <= MAX_PREFIX_BITS:
            raise ValueError(f"prefix_bits must be in 1..{MAX_PREFIX_BITS}")
        if k.bit_length() < bits:
            raise ValueError(f"index {k} has fewer than {bits} bits")
        j = k >> (k.bit_length() - bits)
        f, fp, v = _exact_triple(j)
        return cls(bits=bits, prefix=j, fib=f, fib_prev=fp, lucas=v)

    def matches(self, k: int) -> bool:
        return k.bit_length() >= self.bits and k >> (k.bit_length() - self.bits) == self.prefix


class StalePrefixError(ValueError):
    pass


def fib_mod(ctx, k: int, scheme: str = DEFAULT_SCHEME, prefix_bits: int = 0,
            state: PrefixState | None = None) -> int:
    """F_k mod m by the chosen scheme, optionally resuming from a prefix state.

    With ``prefix_bits > 0`` the loop starts after the leading ``prefix_bits``
    digits of k, whose state comes from ``state`` (built on the fly if None).
    A state built for different leading digits raises
    :class:`StalePrefixError`.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if not 0 <= prefix_bits <= MAX_PREFIX_BITS:
        raise ValueError(f"prefix_bits must be in 0..{MAX_PREFIX_BITS}")
    ctx = _context(ctx)
    if prefix_bits == 0 or k.bit_length() < max(prefix_bits, 2):
        return _out(ctx, _fib_pair(ctx, k, scheme).first)
    if state is None:
        state = PrefixState.for_index(k, prefix_bits)
    elif state.bits != prefix_bits or not state.matches(k):
        raise StalePrefixError(f"prefix state for {state.prefix:b} does not match index {k:b}")
    m = ctx.m
    second = state.lucas if scheme == "fiblucas" else state.fib_prev
    start = FibPairMod(
        k=state.prefix,
        first=_small(ctx, state.fib % m),
        second=_small(ctx, second % m),
        sign=-1 if state.prefix & 1 else 1,
    )
    return _out(ctx, _run(ctx, k, scheme, start, k.bit_length() - prefix_bits - 1).first)


# ---------------------------------------------------------------------------
# exact oracles


def _guard(k: int) -> None:
    if not 0 <= k <= EXACT_LIMIT:
        raise ValueError(f"exact Fibonacci values are limited to 0 <= k <= {EXACT_LIMIT}, got {k}")


@lru_cache(maxsize=4)
def _exact_table(kind: str) -> tuple[int, ...]:
    a, b = (0, 1) if kind == "F" else (2, 1)
    out = []
    for _ in range(EXACT_LIMIT + 1):
        out.append(a)
        a, b = b, a + b
    return tuple(out)


def fib_exact(k: int) -> int:
    """F_k exactly by linear recursion, for 0 <= k <= 10**4."""
    _guard(k)
    return _exact_table("F")[k]


def lucas_exact(k: int) -> int:
    """V_k exactly (V_0 = 2, V_1 = 1), for 0 <= k <= 10**4."""
    _guard(k)
    return _exact_table("V")[k]


def fib_pair_mod(k: int, m: int) -> tuple[int, int]:
    """(F_k mod m, F_{k+1} mod m) with plain residues, for any m >= 1."""
    if k < 0:
        raise ValueError("index must be non-negative")
    a, b = 0, 1 % m  # F_0, F_1
    for bit in bin(k)[2:]:
        # (F_j, F_{j+1}) -> (F_{2j}, F_{2j+1})
        a, b = a * (2 * b - a) % m, (a * a + b * b) % m
        if bit == "1":
            a, b = b, (a + b) % m
    return a, b
