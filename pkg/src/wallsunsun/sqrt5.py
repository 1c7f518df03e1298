"""Square roots of 5 modulo p and p**2, and the golden ratio modulo p**2.

For p = +-1 mod 5 the golden ratio r = (1 + sqrt 5)/2 exists modulo p**2 and
``r**(p-1) = 1 (mod p**2)`` exactly when p is a Wall-Sun-Sun prime.  The
square root modulo p is found by the cheapest formula for the class of p:

* p = 3 mod 4: ``5**((p+1)/4)``;
* p = 5 mod 8: ``5**((p+3)/8)`` when 5 is a fourth power residue, else
  ``10 * 20**((p-5)/8)``; the quartic character is read off the
  decomposition ``p = a**2 + b**2`` (it is a fourth power iff 5 divides b);
* p = 1 mod 8: Shanks' algorithm.

Roots are returned as the smaller of the two representatives in [0, p).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .core_arith import signed_residue


class QuarticClass(enum.Enum):
    QUARTIC_RESIDUE = "quartic"
    QUADRATIC_ONLY = "quadratic"


@dataclass(frozen=True)
class SquareDecomposition:
    """p = a**2 + b**2 with a odd, b even and positive, a normalised by p mod 8."""

    p: int
    a: int
    b: int

    def __post_init__(self):
        if self.a * self.a + self.b * self.b != self.p:
            raise ValueError(f"{self.a}^2 + {self.b}^2 != {self.p}")


@dataclass(frozen=True)
class GoldenRatioMod:
    p: int
    w: int  # sqrt 5 mod p**2
    r: int  # (1 + w)/2 mod p**2
    s_conj: int  # 1 - r mod p**2

    @property
    def modulus(self) -> int:
        return self.p * self.p


def _split_class(p: int) -> bool:
    return p % 5 in (1, 4)


def _canonical_root(w: int, p: int) -> int:
    w %= p
    return min(w, p - w) if w else 0


def _check_root(w: int, p: int, q: int = 5) -> int:
    if (w * w - q) % p:
        raise ValueError(f"{w} is not a square root of {q} modulo {p}")
    return _canonical_root(w, p)


def sqrt5_3mod4(p: int) -> int:
    """sqrt 5 mod p for p = 3 mod 4 and p = +-1 mod 5."""
    if p % 4 != 3:
        raise ValueError(f"{p} is not 3 mod 4")
    if not _split_class(p):
        raise ValueError(f"5 is not a square modulo {p}")
    return _check_root(pow(5, (p + 1) // 4, p), p)


def tonelli_shanks(p: int, q: int = 5) -> int:
    """sqrt q mod an odd prime p (Shanks); raises if q is a non-residue."""
    q %= p
    if q == 0:
        return 0
    if pow(q, (p - 1) // 2, p) != 1:
        raise ValueError(f"{q} is not a quadratic residue modulo {p}")
    s, odd = 0, p - 1
    while odd % 2 == 0:
        odd //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    c = pow(z, odd, p)
    t = pow(q, odd, p)
    r = pow(q, (odd + 1) // 2, p)
    m = s
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m = i
        c = b * b % p
        t = t * c % p
        r = r * b % p
    return _check_root(r, p, q)


def two_squares(p: int) -> tuple[int, int]:
    """(a, b) with a odd, b even, both positive and a**2 + b**2 = p (p = 1 mod 4 prime).

    Euclid's algorithm on (p, x) with x**2 = -1 mod p stops at the first two
    remainders below sqrt p.
    """
    if p % 4 != 1:
        raise ValueError(f"{p} is not 1 mod 4")
    x = tonelli_shanks(p, p - 1)
    r0, r1 = p, x
    limit = math.isqrt(p)
    while r1 > limit:
        r0, r1 = r1, r0 % r1
    a = r1
    b = math.isqrt(p - a * a)
    if a * a + b * b != p:
        raise ValueError(f"no decomposition found for {p}; is it prime?")
    return (a, b) if a % 2 else (b, a)


def normalize(p: int, a: int, b: int) -> SquareDecomposition:
    """Sign a so that a = 3 mod 4 (p = 5 mod 8) or a = 1 mod 4 (p = 1 mod 8); b > 0."""
    if a % 2 == 0:
        a, b = b, a
    want = 3 if p % 8 == 5 else 1
    if a % 4 != want:
        a = -a
    return SquareDecomposition(p=p, a=a, b=abs(b))


def quartic_class(p: int, decomposition: tuple[int, int] | None = None
                  ) -> tuple[SquareDecomposition, QuarticClass]:
    """Decompose p = a**2 + b**2 and classify 5 as fourth power residue or not.

    5 is a fourth power modulo p iff 5 divides the even part b (equivalently
    iff 5 does not divide a).  ``decomposition`` skips the search when the
    caller already knows (a, b), e.g. from the square-sum sieve.
    """
    if p % 4 != 1:
        raise ValueError(f"{p} is 3 mod 4: every square is a fourth power there")
    if not _split_class(p):
        raise ValueError(f"5 is not a square modulo {p}")
    a, b = decomposition if decomposition is not None else two_squares(p)
    dec = normalize(p, a, b)
    cls = QuarticClass.QUARTIC_RESIDUE if dec.b % 5 == 0 else QuarticClass.QUADRATIC_ONLY
    return dec, cls


def sqrt5_5mod8(p: int, cls: QuarticClass) -> int:
    """sqrt 5 mod p for p = 5 mod 8 given the quartic character of 5."""
    if p % 8 != 5:
        raise ValueError(f"{p} is not 5 mod 8")
    if not _split_class(p):
        raise ValueError(f"5 is not a square modulo {p}")
    if cls is QuarticClass.QUARTIC_RESIDUE:
        w = pow(5, (p + 3) // 8, p)
    else:
        w = 10 * pow(20, (p - 5) // 8, p) % p
    return _check_root(w, p)


def inverse_of_5(p: int) -> int:
    """1/5 mod p without a gcd, for p = +-1 mod 5."""
    if p % 5 == 1:
        return (4 * p + 1) // 5
    if p % 5 == 4:
        return (p + 1) // 5
    return pow(5, -1, p)


def hensel_lift_sqrt(p: int, w: int) -> int:
    """Lift a root of x**2 = 5 from p to p**2.

    ``W = w - ((w**2 - 5)/p * 1/(2w) mod p) * p`` where ``1/(2w) = w/10``
    because w**2 = 5.
    """
    if p in (2, 5):
        raise ValueError("p must differ from 2 and 5")
    w %= p
    d = w * w - 5
    if d % p:
        raise ValueError(f"{w} is not a square root of 5 modulo {p}")
    inv_w = w * inverse_of_5(p) % p
    y = inv_w * ((p + 1) // 2) % p
    return (w - (d // p) * y % p * p) % (p * p)


def sqrt5_mod_p(p: int, cls: QuarticClass | None = None) -> int:
    """Dispatch to the cheapest square root method for p."""
    if p % 4 == 3:
        return sqrt5_3mod4(p)
    if p % 8 == 5:
        if cls is None:
            cls = quartic_class(p)[1]
        return sqrt5_5mod8(p, cls)
    return tonelli_shanks(p, 5)


def golden_ratio(p: int, cls: QuarticClass | None = None) -> GoldenRatioMod:
    """sqrt 5 and the golden ratio (1 + sqrt 5)/2 modulo p**2 (p = +-1 mod 5)."""
    if p % 2 == 0 or not _split_class(p):
        raise ValueError(f"sqrt 5 does not exist modulo {p}")
    w = hensel_lift_sqrt(p, sqrt5_mod_p(p, cls))
    m = p * p
    inv2 = (m + 1) // 2
    r = (1 + w) * inv2 % m
    return GoldenRatioMod(p=p, w=w, r=r, s_conj=(1 - r) % m)


def _witness(g: GoldenRatioMod) -> int:
    t = pow(g.r, g.p - 1, g.modulus)
    return (t - 1) // g.p


def golden_power_witness(p: int, cls: QuarticClass | None = None) -> int:
    """(r**(p-1) - 1)/p mod p; zero exactly for Wall-Sun-Sun primes."""
    return _witness(golden_ratio(p, cls))


def golden_power_test(p: int, cls: QuarticClass | None = None) -> tuple[bool, int]:
    """(exceptional, quotient) from the golden ratio power r**(p-1) mod p**2.

    With t = r**(p-1) = 1 + p u, F_{p-1} = (t - t**-1)/sqrt 5 = 2 p u / w
    modulo p**2, so the Fibonacci quotient is ``2 u w / 5 mod p``; it is
    returned as the signed representative in (-p/2, p/2].
    """
    g = golden_ratio(p, cls)
    u = _witness(g)
    q = 2 * u * g.w * inverse_of_5(p) % p
    return u == 0, signed_residue(q, p)
