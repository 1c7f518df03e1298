"""Interval search for small Fibonacci quotients.

An interval [A, B] is cut into windows of ``window`` consecutive integers.
Every (window, residue class) pair is one task: the class is sieved, each
surviving prime gets its quotient from the strategy chosen for its class
mod 40, and primes whose quotient is below the limit become records.
Tasks run in worker processes; results come back in plan order, so the
output does not depend on the worker count.  A window is checkpointed once
all of its classes are done.
"""

from __future__ import annotations

import enum
import logging
import math
import multiprocessing as mp
import os
import re
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import kernels
from .core_arith import signed_residue
from .fib_engine import PrefixState, fib_mod, fib_mod_forster
from .prime_sieve import (ResidueClassWindow, SmallPrimeTable, auto_prime_limit, complete_prime_limit,
                          first_primes, sieve_window, small_primes)
from .square_sum_sieve import annulus_candidates, precompute_roots

log = logging.getLogger(__name__)

CLASSES_40 = tuple(r for r in range(40) if r % 2 and r % 5)
DEFAULT_WINDOW = 10**10  # 2.5e8 candidates per class mod 40
DEFAULT_LIMIT = 10
GOLDEN_CROSSOVER = 4 * 10**13
SUMSIEVE_CROSSOVER = 16 * 10**12
SUMSIEVE_ROOTS_LIMIT = 1000
SUMSIEVE_CHUNK = 2 * 10**8
PREFIX_BITS = 7
MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17)
MR_DETERMINISTIC_BOUND = 341_550_071_728_321


class Strategy(enum.Enum):
    DIRECT = "direct"
    GOLDEN = "golden"
    SUMSIEVE = "sumsieve"
    AUTO = "auto"


class Convention(enum.Enum):
    SIGNED = "signed"
    POSITIVE = "positive"


@dataclass(frozen=True)
class ResidueClass:
    residue: int
    modulus: int

    def __post_init__(self):
        if self.modulus not in (10, 20, 40):
            raise ValueError(f"class modulus must be 10, 20 or 40, got {self.modulus}")
        if not 0 <= self.residue < self.modulus or math.gcd(self.residue, 10) != 1:
            raise ValueError(f"{self.residue} mod {self.modulus} is not a class prime to 10")

    def classes_40(self) -> tuple[int, ...]:
        return tuple(r for r in CLASSES_40 if r % self.modulus == self.residue)

    def __str__(self) -> str:
        return f"{self.residue}/{self.modulus}"

    @classmethod
    def parse(cls, text: str) -> "ResidueClass":
        """``"21"`` (mod 40), ``"3/10"`` or ``"11 mod 20"``."""
        m = re.fullmatch(r"\s*(\d+)\s*(?:(?:/|mod)\s*(\d+))?\s*", text)
        if not m:
            raise ValueError(f"cannot parse residue class {text!r}")
        return cls(int(m.group(1)), int(m.group(2) or 40))


def parse_classes(text: str | None = None) -> tuple[ResidueClass, ...]:
    if text is None or text.strip() in ("", "all"):
        return tuple(ResidueClass(r, 40) for r in CLASSES_40)
    return tuple(ResidueClass.parse(t) for t in text.split(","))


@dataclass(frozen=True)
class SearchPlan:
    lo: int
    hi: int
    classes: tuple[ResidueClass, ...] = field(default_factory=parse_classes)
    strategy: Strategy = Strategy.AUTO
    window: int = DEFAULT_WINDOW
    limit: int = DEFAULT_LIMIT
    workers: int = 1
    convention: Convention = Convention.SIGNED
    scheme: str = "fiblucas"
    sieve_limit: str = "complete"
    golden_crossover: int = GOLDEN_CROSSOVER
    sumsieve_crossover: int = SUMSIEVE_CROSSOVER

    def __post_init__(self):
        if self.lo < 3 or self.hi < self.lo:
            raise ValueError("need 3 <= A <= B")
        if self.hi >= 1 << 47:
            raise ValueError("B must stay below 2**47 (p**2 must fit the 96-bit kernel)")
        if self.window < 40:
            raise ValueError("window must cover at least 40 integers")
        if self.limit < 1:
            raise ValueError("limit must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        if self.sieve_limit not in ("complete", "auto"):
            raise ValueError("sieve_limit must be 'complete' or 'auto'")
        if self.scheme not in kernels.SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        seen: set[int] = set()
        for c in self.classes:
            sub = set(c.classes_40())
            if sub & seen:
                raise ValueError(f"class {c} overlaps another selected class")
            seen |= sub
        if self.window // min(c.modulus for c in self.classes) > 4 * 250_000_000:
            raise ValueError("window larger than the sieve buffer capacity")

    @property
    def n_windows(self) -> int:
        return (self.hi - self.lo) // self.window + 1

    def window_range(self, i: int) -> tuple[int, int]:
        """Inclusive bounds of window i."""
        a = self.lo + i * self.window
        return a, min(a + self.window - 1, self.hi)


@dataclass(frozen=True)
class QuotientRecord:
    p: int
    quotient: int
    cls: int
    strategy: str
    window: int

    def line(self) -> str:
        return f"p={self.p} q={self.quotient} class={self.cls} strat={self.strategy} win={self.window}"

    @classmethod
    def parse(cls, line: str) -> "QuotientRecord":
        f = dict(kv.split("=", 1) for kv in line.split())
        return cls(int(f["p"]), int(f["q"]), int(f["class"]), f["strat"], int(f["win"]))


@dataclass(frozen=True)
class Checkpoint:
    window: int
    state: str
    n_primes: int

    def line(self) -> str:
        return f"win={self.window} state={self.state} n_primes={self.n_primes}"

    @classmethod
    def parse(cls, line: str) -> "Checkpoint":
        f = dict(kv.split("=", 1) for kv in line.split())
        return cls(int(f["win"]), f["state"], int(f["n_primes"]))


@dataclass
class WindowResult:
    window: int
    records: list[QuotientRecord]
    n_primes: int
    composites: int
    exceptional: list[int]
    sieve_seconds: float = 0.0
    total_seconds: float = 0.0


# ---------------------------------------------------------------------------
# strategy and primality


def strategy_select(p_class: int, height: int, strategy: Strategy = Strategy.AUTO,
                    golden_crossover: int = GOLDEN_CROSSOVER,
                    sumsieve_crossover: int = SUMSIEVE_CROSSOVER) -> Strategy:
    """Resolve the strategy for primes p = p_class (mod 40) near ``height``.

    A forced strategy is used wherever it applies; golden-ratio powering
    needs p = +-1 mod 5 and the sum sieve p = 21, 29 mod 40, otherwise the
    automatic choice is made.
    """
    r = p_class % 40
    if r not in CLASSES_40:
        raise ValueError(f"{p_class} mod 40 is not prime to 10")
    split = r % 5 in (1, 4)
    if strategy is Strategy.DIRECT:
        return Strategy.DIRECT
    if strategy is Strategy.GOLDEN and split:
        return Strategy.GOLDEN
    if strategy is Strategy.SUMSIEVE and r in (21, 29):
        return Strategy.SUMSIEVE
    if not split:
        return Strategy.DIRECT
    if r % 4 == 3:
        return Strategy.GOLDEN
    if r in (21, 29):
        return Strategy.SUMSIEVE if height < sumsieve_crossover else Strategy.DIRECT
    return Strategy.GOLDEN if height < golden_crossover else Strategy.DIRECT


def _fib_check(p: int) -> bool:
    k = p - 1 if p % 5 in (1, 4) else p + 1
    return fib_mod_forster(p, k, montgomery=False) == 0


def confirm_prime(p: int) -> bool:
    """Deterministic for p < 3.4e14: strong tests to the bases 2..17 and p | F_{p -+ 1}."""
    if p < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if p % q == 0:
            return p == q
    if p >= MR_DETERMINISTIC_BOUND:
        raise ValueError("confirm_prime is deterministic only below 3.4e14")
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in MR_WITNESSES:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return _fib_check(p)


def fib_index(p: int) -> int:
    return p - 1 if p % 5 in (1, 4) else 2 * p + 2


def verify_zero(p: int) -> bool:
    """Re-check a quotient-0 candidate: primality and an independent Forster recomputation."""
    return confirm_prime(p) and fib_mod(p * p, fib_index(p), "forster") == 0


# ---------------------------------------------------------------------------
# per-task work


_TABLE_CACHE: dict[tuple[str, int], SmallPrimeTable] = {}
_PREFIX = kernels.prefix_tables(PREFIX_BITS)


def _table_for(plan: SearchPlan, top: int) -> SmallPrimeTable:
    if plan.sieve_limit == "complete":
        key = ("complete", complete_prime_limit(plan.hi))
        make = lambda: small_primes(key[1])  # noqa: E731
    else:
        key = ("auto", auto_prime_limit(max(top, 100)))
        make = lambda: first_primes(key[1])  # noqa: E731
    table = _TABLE_CACHE.get(key)
    if table is None:
        _TABLE_CACHE.clear()
        table = _TABLE_CACHE[key] = make()
    return table


def _quotients_direct(ps: np.ndarray, scheme: str) -> np.ndarray:
    out = np.empty(len(ps), dtype=np.int64)
    if len(ps):
        kernels.direct_quotients(ps, kernels.SCHEMES[scheme], PREFIX_BITS, _PREFIX, out)
    return out


def _quotients_golden(ps: np.ndarray, quartic: np.ndarray | None = None) -> np.ndarray:
    out = np.empty(len(ps), dtype=np.int64)
    if quartic is None:
        quartic = np.zeros(len(ps), dtype=np.int8)
    if len(ps):
        kernels.golden_quotients(ps, quartic, out)
    return out


_ROOTS = None


def _quartic_from_sum_sieve(ps: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """+1/-1 quartic character of 5 for each p from its decomposition p = a^2 + b^2 (b even).

    Primes the small-table sum sieve missed (never, for primes) keep 0.
    """
    global _ROOTS
    if _ROOTS is None:
        _ROOTS = precompute_roots(SUMSIEVE_ROOTS_LIMIT)
    quartic = np.zeros(len(ps), dtype=np.int8)
    for a in range(lo, hi + 1, SUMSIEVE_CHUNK):
        b = min(a + SUMSIEVE_CHUNK, hi + 1)
        cp, _, cb = annulus_candidates(a, b, _ROOTS)
        if not len(cp):
            continue
        idx = np.searchsorted(cp, ps)
        idx = np.minimum(idx, len(cp) - 1)
        hit = cp[idx] == ps
        quartic[hit] = np.where(cb[idx[hit]] % 5 == 0, 1, -1)
    return quartic


def _represent(q: int, p: int, convention: Convention) -> int:
    return signed_residue(q, p) if convention is Convention.SIGNED else q


def prefix_banner(p: int) -> str:
    """Prefix state for the Fibonacci index of p, as logged at window starts."""
    k = fib_index(p)
    st = PrefixState.for_index(k, min(PREFIX_BITS, k.bit_length()))
    return f"prefix={st.prefix:b} F={st.fib} Fprev={st.fib_prev} V={st.lucas}"


def process_task(plan: SearchPlan, win: int, rc: ResidueClass) -> WindowResult:
    """Sieve one class of one window and compute the quotients of its primes."""
    t0 = time.perf_counter()
    lo, hi = plan.window_range(win)
    table = _table_for(plan, hi)
    window = ResidueClassWindow.covering(lo, hi + 1, rc.residue, rc.modulus)
    surv = sieve_window(window, table).survivors() if window.length else np.zeros(0, np.int64)
    surv = surv[(surv >= lo) & (surv <= hi)]
    top = int(table.primes[-1])
    if lo <= top:
        tp = table.primes
        small = tp[(tp >= lo) & (tp <= hi) & (tp % rc.modulus == rc.residue)]
        surv = np.union1d(small, surv)
    t_sieve = time.perf_counter() - t0

    quot = np.full(len(surv), -1, dtype=np.int64)
    strat_of = np.empty(len(surv), dtype=object)
    r40 = surv % 40
    for c in rc.classes_40():
        sel = np.flatnonzero(r40 == c)
        if not len(sel):
            continue
        st = strategy_select(c, lo, plan.strategy, plan.golden_crossover, plan.sumsieve_crossover)
        ps = np.ascontiguousarray(surv[sel])
        if st is Strategy.DIRECT:
            q = _quotients_direct(ps, plan.scheme)
        elif st is Strategy.GOLDEN:
            q = _quotients_golden(ps)
        else:
            q = _quotients_golden(ps, _quartic_from_sum_sieve(ps, lo, hi))
        quot[sel] = q
        strat_of[sel] = st.value

    ok = quot >= 0
    composites = int((~ok).sum())
    n_primes = int(ok.sum())
    if plan.convention is Convention.SIGNED:
        small = ok & ((quot < plan.limit) | (surv - quot < plan.limit))
    else:
        small = ok & (quot < plan.limit)
    records, exceptional = [], []
    for i in np.flatnonzero(small):
        p = int(surv[i])
        q = _represent(int(quot[i]), p, plan.convention)
        if not confirm_prime(p):
            composites += 1
            n_primes -= 1
            continue
        if q == 0:
            if not verify_zero(p):
                log.warning("p=%d: quotient 0 not confirmed by the Forster recomputation", p)
                continue
            exceptional.append(p)
        records.append(QuotientRecord(p, q, p % 40, str(strat_of[i]), win))
    return WindowResult(win, records, n_primes, composites, exceptional, t_sieve, time.perf_counter() - t0)


def _task(args):
    plan, win, rc = args
    return process_task(plan, win, rc)


# ---------------------------------------------------------------------------
# driver


def read_checkpoint(path: str) -> dict[int, Checkpoint]:
    done = {}
    if os.path.exists(path):
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    cp = Checkpoint.parse(line)
                    if cp.state == "done":
                        done[cp.window] = cp
    return done


def write_checkpoint(path: str, entries: list[Checkpoint]) -> None:
    """Atomic replace, so a crash leaves either the old or the new file."""
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.writelines(c.line() + "\n" for c in entries)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _window_tasks(plan: SearchPlan, windows: list[int]):
    for w in windows:
        for rc in plan.classes:
            yield plan, w, rc


def run_search(plan: SearchPlan, checkpoint: str | None = None,
               on_record: Callable[[QuotientRecord], None] | None = None) -> Iterator[WindowResult]:
    """Yield one merged :class:`WindowResult` per window, in window order.

    Windows already marked done in ``checkpoint`` are skipped; after each
    window the file is rewritten with every completed window.
    """
    done = read_checkpoint(checkpoint) if checkpoint else {}
    todo = [w for w in range(plan.n_windows) if w not in done]
    entries = [done[w] for w in sorted(done)]
    per_window = len(plan.classes)

    if plan.workers > 1:
        pool = mp.get_context("fork").Pool(plan.workers)
        results = pool.imap(_task, _window_tasks(plan, todo), chunksize=1)
    else:
        pool = None
        results = (_task(t) for t in _window_tasks(plan, todo))
    try:
        for w in todo:
            lo, hi = plan.window_range(w)
            log.info("win=%d range=[%d, %d] %s", w, lo, hi, prefix_banner(max(lo, 7)))
            merged = WindowResult(w, [], 0, 0, [])
            for _ in range(per_window):
                part = next(results)
                merged.records += part.records
                merged.n_primes += part.n_primes
                merged.composites += part.composites
                merged.exceptional += part.exceptional
                merged.sieve_seconds += part.sieve_seconds
                merged.total_seconds += part.total_seconds
            merged.records.sort(key=lambda r: r.p)
            merged.exceptional.sort()
            if on_record is not None:
                for rec in merged.records:
                    on_record(rec)
            entries.append(Checkpoint(w, "done", merged.n_primes))
            if checkpoint:
                write_checkpoint(checkpoint, sorted(entries, key=lambda c: c.window))
            yield merged
    finally:
        if pool is not None:
            pool.terminate()
            pool.join()


def search_records(plan: SearchPlan) -> list[QuotientRecord]:
    """All records of a plan, without checkpointing."""
    out: list[QuotientRecord] = []
    for res in run_search(plan):
        out += res.records
    return out


def probe(p: int, convention: Convention = Convention.SIGNED) -> int:
    """Quotient of a single prime by the direct kernel."""
    if p in (2, 5) or not confirm_prime(p):
        raise ValueError(f"{p} is not a prime other than 2 and 5")
    q = int(_quotients_direct(np.array([p], dtype=np.int64), "fiblucas")[0])
    return _represent(q, p, convention)
