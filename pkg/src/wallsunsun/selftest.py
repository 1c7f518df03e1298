"""Fast end-to-end checks, printed as ``check=<name> result=PASS|FAIL`` lines."""

from __future__ import annotations

import random
from typing import Callable, TextIO

import numpy as np


def _known_quotients() -> bool:
    from .search import Convention, SearchPlan, search_records

    recs = search_records(SearchPlan(3, 3000, limit=10, convention=Convention.POSITIVE))
    want = [(3, 1), (7, 1), (11, 5), (13, 7), (17, 2), (19, 3), (43, 8), (89, 5), (163, 6), (199, 5),
            (239, 5), (701, 5), (941, 6), (997, 3), (1063, 2), (1621, 2), (2003, 1)]
    return [(r.p, r.quotient) for r in recs] == want


def _spot_checks() -> bool:
    from .search import probe

    return probe(82789107950701) == -42 and probe(101876918491) == 87 and probe(67166190593) == 1


def _kernel_vs_python() -> bool:
    from . import kernels
    from .fib_engine import fib_pair_mod

    rng = random.Random(7)
    ks = np.array([rng.randrange(1, 1 << 40) for _ in range(200)], dtype=np.uint64)
    ms = [rng.randrange(3, 1 << 90) | 1 for _ in range(200)]
    limbs = np.array([[(m >> (32 * j)) & 0xFFFFFFFF for j in range(3)] for m in ms], dtype=np.uint64)
    out = np.zeros((200, 3), dtype=np.uint64)
    for scheme in kernels.SCHEMES.values():
        kernels.fib_mod_batch(ks, limbs, scheme, 7, kernels.prefix_tables(7), out)
        got = [int(r[0]) | int(r[1]) << 32 | int(r[2]) << 64 for r in out]
        if got != [fib_pair_mod(int(k), m)[0] for k, m in zip(ks, ms)]:
            return False
    return True


def _sieve_exact() -> bool:
    import sympy

    from .prime_sieve import primes_in_class

    lo = 10**9
    got = primes_in_class(lo, lo + 10**5, 13, 40).tolist()
    return got == [p for p in sympy.primerange(lo, lo + 10**5) if p % 40 == 13]


def _golden_agrees() -> bool:
    from .search import _quotients_direct, _quotients_golden
    from .prime_sieve import primes_in_class

    ps = np.concatenate([primes_in_class(10**10, 10**10 + 10**6, r, 40) for r in (1, 9, 11, 19, 21, 29)])
    return bool((_quotients_golden(ps) == _quotients_direct(ps, "fiblucas")).all())


def _wall_small() -> bool:
    from .wall_kappa import verify_wall_theorem

    return verify_wall_theorem(500).ok


CHECKS: list[tuple[str, Callable[[], bool]]] = [
    ("known_quotients", _known_quotients),
    ("spot_checks", _spot_checks),
    ("kernel_vs_python", _kernel_vs_python),
    ("sieve_exact", _sieve_exact),
    ("golden_agrees_with_direct", _golden_agrees),
    ("wall_theorem_500", _wall_small),
]


def run_selftest(out: TextIO) -> bool:
    ok = True
    for name, fn in CHECKS:
        try:
            passed = fn()
        except Exception as exc:  # report and keep going
            out.write(f"check={name} result=FAIL error={type(exc).__name__}\n")
            ok = False
            continue
        out.write(f"check={name} result={'PASS' if passed else 'FAIL'}\n")
        ok &= passed
    return ok
