"""Fixed-width Montgomery arithmetic for moduli m = p**2.

This is the reference implementation: values are Python ints that are
guaranteed to fit in ``n`` limbs of ``width`` bits, and every reduction goes
through :func:`redc`, which clears one limb per iteration exactly like a
hardware implementation would.  The compiled search kernels in
:mod:`wallsunsun._mont3` implement the same algorithm with 3 x 32-bit limbs
and are tested against this module.

Montgomery-domain values are bounded by ``R**n / 5`` (not by ``m``), so a
reduced value of residue 0 may come back as ``m`` itself.  Callers that report
residues must map ``m`` to 0 (see :func:`residue`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

# inverses of the odd residues mod 2**8; even slots are unused
_INV8 = tuple(pow(i, -1, 256) if i & 1 else 0 for i in range(256))

DEFAULT_LIMBS = {64: 2, 32: 3}


def word_inverse(m0: int, width: int = 32) -> int:
    """Return ``i`` with ``i * m0 == 1 (mod 2**width)``.

    Starts from an 8-bit table lookup and doubles the number of correct bits
    with Hensel lifts ``i <- 2i - i*i*m0`` (8 -> 16 -> 32, and -> 64 for
    64-bit words).  No division is involved.
    """
    if m0 % 2 == 0:
        raise ValueError(f"word_inverse needs an odd argument, got {m0}")
    inv = _INV8[m0 & 0xFF]
    bits = 8
    while bits < width:
        bits *= 2
        inv = (2 * inv - inv * inv * m0) & ((1 << bits) - 1)
    return inv & ((1 << width) - 1)


def to_limbs(x: int, count: int, width: int = 32) -> list[int]:
    """Little-endian limbs of ``x``; raises if ``x`` needs more than ``count``."""
    if x < 0 or x >> (count * width):
        raise OverflowError(f"{x} does not fit in {count} limbs of {width} bits")
    mask = (1 << width) - 1
    return [(x >> (width * i)) & mask for i in range(count)]


def from_limbs(limbs, width: int = 32) -> int:
    value = 0
    for limb in reversed(list(limbs)):
        value = (value << width) | int(limb)
    return value


def mul_basecase(a: list[int], b: list[int], width: int = 32) -> list[int]:
    """Schoolbook product of two limb vectors (len(a) + len(b) limbs)."""
    mask = (1 << width) - 1
    out = [0] * (len(a) + len(b))
    for i, ai in enumerate(a):
        carry = 0
        for j, bj in enumerate(b):
            t = out[i + j] + ai * bj + carry
            out[i + j] = t & mask
            carry = t >> width
        out[i + len(b)] = carry
    return out


@dataclass(frozen=True)
class MontgomeryContext:
    """Immutable Montgomery parameters for an odd modulus ``m``.

    ``invm`` is stored negated (``m * invm == -1 mod R``) so that the REDC
    quotient digit is a plain product.  ``bound`` is the first integer that is
    *not* an admissible Montgomery-domain value, i.e. ``floor(R**n / 5) + 1``.
    """

    m: int
    n: int
    width: int
    invm: int
    r2: int
    bound: int = field(repr=False)
    one: int = field(repr=False)

    @property
    def radix(self) -> int:
        return 1 << self.width

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    @classmethod
    def for_modulus(cls, m: int, width: int = 64, n: int | None = None) -> "MontgomeryContext":
        if width not in DEFAULT_LIMBS:
            raise ValueError(f"limb width must be 32 or 64, not {width}")
        if m < 3 or m % 2 == 0:
            raise ValueError(f"Montgomery modulus must be odd and > 1, got {m}")
        if n is None:
            n = DEFAULT_LIMBS[width]
        big = 1 << (width * n)
        if 5 * m > big:
            raise ValueError(f"modulus {m} exceeds the limb budget R**n/5 for n={n}, w={width}")
        invm = (-word_inverse(m & ((1 << width) - 1), width)) & ((1 << width) - 1)
        # R**(2n) mod m by repeated doubling: no division by m needed
        r2 = 1
        for _ in range(2 * n * width):
            r2 <<= 1
            if r2 >= m:
                r2 -= m
        ctx = cls(m=m, n=n, width=width, invm=invm, r2=r2, bound=big // 5 + 1, one=0)
        object.__setattr__(ctx, "one", redc(ctx, r2))
        return ctx


def mont_new(p: int, width: int = 64, n: int | None = None) -> MontgomeryContext:
    """Context for the modulus ``p**2`` (``p`` an odd prime)."""
    if p % 2 == 0:
        raise ValueError(f"p must be odd, got {p}")
    return MontgomeryContext.for_modulus(p * p, width=width, n=n)


def redc(ctx: MontgomeryContext, a: int) -> int:
    """Montgomery reduction ``a -> a * R**-n mod m`` with lazy output.

    ``n`` rounds of: pick ``q = -a_0 / m mod R`` so that adding ``q*m`` clears
    the lowest limb, then drop that limb.  A single conditional subtraction
    keeps the result below ``R**n / 5``; the result is *not* normalised below
    ``m``.
    """
    mask, w, m = ctx.mask, ctx.width, ctx.m
    for _ in range(ctx.n):
        q = ((a & mask) * ctx.invm) & mask
        a = (a + q * m) >> w
    if a >= ctx.bound:
        a -= m
    assert a < ctx.bound
    return a


def to_mont(ctx: MontgomeryContext, x: int) -> int:
    if not 0 <= x < ctx.m:
        raise ValueError(f"{x} is not a residue modulo {ctx.m}")
    return redc(ctx, x * ctx.r2)


def from_mont(ctx: MontgomeryContext, x_m: int) -> int:
    """Leave the Montgomery domain.  The result lies in ``[0, m]``; ``m`` means 0."""
    return redc(ctx, x_m)


def residue(ctx: MontgomeryContext, x_m: int) -> int:
    """Reporting boundary: from_mont with ``m`` folded to 0."""
    r = from_mont(ctx, x_m)
    return 0 if r == ctx.m else r


def mont_mul(ctx: MontgomeryContext, x_m: int, y_m: int) -> int:
    # operands are a handful of limbs: CPython multiplies them schoolbook
    return redc(ctx, x_m * y_m)


def mont_sqr(ctx: MontgomeryContext, x_m: int) -> int:
    return redc(ctx, x_m * x_m)


def mont_pow(ctx: MontgomeryContext, base_m: int, exponent: int) -> int:
    """Left-to-right 2**3-ary sliding-window powering in the Montgomery domain."""
    if exponent < 0:
        raise ValueError("negative exponent")
    if exponent == 0:
        return ctx.one
    b2 = mont_sqr(ctx, base_m)
    odd = [base_m]
    for _ in range(3):
        odd.append(mont_mul(ctx, odd[-1], b2))
    result = None
    i = exponent.bit_length() - 1
    while i >= 0:
        if not (exponent >> i) & 1:
            if result is not None:
                result = mont_sqr(ctx, result)
            i -= 1
            continue
        # longest window of at most 3 bits that ends in a set bit
        j = max(i - 2, 0)
        while not (exponent >> j) & 1:
            j += 1
        window = (exponent >> j) & ((1 << (i - j + 1)) - 1)
        if result is None:
            result = odd[window >> 1]
        else:
            for _ in range(i - j + 1):
                result = mont_sqr(ctx, result)
            result = mont_mul(ctx, result, odd[window >> 1])
        i = j - 1
    return result


def canonical(ctx: MontgomeryContext, x_m: int) -> int:
    """Fold a REDC output of canonical operands (< 2m) into [0, m)."""
    return x_m - ctx.m if x_m >= ctx.m else x_m


def mont_add(ctx: MontgomeryContext, x: int, y: int) -> int:
    s = x + y
    return s - ctx.m if s >= ctx.m else s


def mont_sub(ctx: MontgomeryContext, x: int, y: int) -> int:
    return x - y if x >= y else x + ctx.m - y


def mont_half(ctx: MontgomeryContext, x: int) -> int:
    """x/2 mod m for canonical x: add m when odd, then shift."""
    if x & 1:
        x += ctx.m
    return x >> 1


def signed_residue(x: int, p: int) -> int:
    """Representative of ``x mod p`` in ``(-p/2, p/2]``."""
    r = x % p
    return r - p if 2 * r > p else r
