import os
from pathlib import Path

import numpy as np
import pytest
import sympy
from wallsunsun.fib_engine import fib_pair_mod
from hypothesis import given, settings
from hypothesis import strategies as st

from wallsunsun import search as S
from wallsunsun.search import (Checkpoint, Convention, QuotientRecord, ResidueClass, SearchPlan,
                               Strategy, confirm_prime, parse_classes, probe, read_checkpoint,
                               run_search, search_records, strategy_select, write_checkpoint)

GOLDEN = Path(__file__).parent / "data" / "quotients_below_2e7.txt"


def test_strategy_select_examples():
    assert strategy_select(11, 10**12) is Strategy.GOLDEN
    assert strategy_select(19, 10**14) is Strategy.GOLDEN
    for r in (3, 13, 7, 17, 23, 37):
        assert strategy_select(r, 10**12) is Strategy.DIRECT
    assert strategy_select(21, 10**12) is Strategy.SUMSIEVE
    assert strategy_select(29, 10**14) is Strategy.DIRECT
    assert strategy_select(1, 10**13) is Strategy.GOLDEN
    assert strategy_select(9, 10**14) is Strategy.DIRECT


def test_strategy_forced():
    assert strategy_select(11, 10, Strategy.DIRECT) is Strategy.DIRECT
    # golden needs p = +-1 mod 5
    assert strategy_select(3, 10, Strategy.GOLDEN) is Strategy.DIRECT
    # the sum sieve needs p = 21, 29 mod 40
    assert strategy_select(1, 10, Strategy.SUMSIEVE) is Strategy.GOLDEN
    with pytest.raises(ValueError):
        strategy_select(5, 10)


def test_parse_classes():
    assert [str(c) for c in parse_classes("21,3/10")] == ["21/40", "3/10"]
    assert len(parse_classes()) == 16
    assert ResidueClass.parse("11/20").classes_40() == (11, 31)
    with pytest.raises(ValueError):
        ResidueClass.parse("4/10")


def test_confirm_prime():
    assert confirm_prime(11634179)
    for line in GOLDEN.read_text().splitlines():
        assert confirm_prime(QuotientRecord.parse(line).p)
    assert not confirm_prime(371)
    assert not confirm_prime(1)
    # strong pseudoprime to bases 2, 3, 5, 7
    assert not confirm_prime(3215031751)


@given(st.integers(2, 10**12))
@settings(max_examples=300)
def test_confirm_prime_matches_sympy(n):
    assert confirm_prime(n) == sympy.isprime(n)


def test_confirm_prime_range_guard():
    with pytest.raises(ValueError):
        confirm_prime(341550071728361)


def test_record_round_trip():
    rec = QuotientRecord(11634179, 2, 19, "golden", 0)
    assert rec.line() == "p=11634179 q=2 class=19 strat=golden win=0"
    assert QuotientRecord.parse(rec.line()) == rec
    cp = Checkpoint(3, "done", 12345)
    assert cp.line() == "win=3 state=done n_primes=12345"
    assert Checkpoint.parse(cp.line()) == cp


@pytest.mark.parametrize("kw", [
    dict(lo=2, hi=10), dict(lo=10, hi=5), dict(lo=3, hi=1 << 47), dict(lo=3, hi=100, window=10),
    dict(lo=3, hi=100, limit=0), dict(lo=3, hi=100, workers=0), dict(lo=3, hi=100, sieve_limit="x"),
    dict(lo=3, hi=100, scheme="nope"), dict(lo=3, hi=100, classes=parse_classes("3/10,13")),
])
def test_plan_validation(kw):
    with pytest.raises(ValueError):
        SearchPlan(**kw)


def test_windows_tile_interval():
    plan = SearchPlan(3, 1000, window=100)
    ranges = [plan.window_range(i) for i in range(plan.n_windows)]
    assert ranges[0][0] == 3 and ranges[-1][1] == 1000
    assert all(b + 1 == c for (_, b), (c, _) in zip(ranges, ranges[1:]))


def test_golden_file():
    plan = SearchPlan(3, 2 * 10**7, limit=10, convention=Convention.POSITIVE)
    got = "".join(r.line() + "\n" for r in search_records(plan))
    assert got == GOLDEN.read_text()


def test_window_split_invariant():
    one = search_records(SearchPlan(3, 10**6, limit=10))
    many = search_records(SearchPlan(3, 10**6, limit=10, window=70_001))
    assert [(r.p, r.quotient) for r in one] == [(r.p, r.quotient) for r in many]


def test_signed_convention():
    recs = search_records(SearchPlan(3, 3000, limit=10))
    pos = {r.p: r.quotient for r in search_records(SearchPlan(3, 3000, limit=10, convention=Convention.POSITIVE))}
    for r in recs:
        assert -10 < r.quotient < 10
        if r.p in pos:
            assert (r.quotient - pos[r.p]) % r.p == 0
    assert any(r.quotient < 0 for r in recs)


def test_direct_equals_auto():
    auto = search_records(SearchPlan(3, 10**7, limit=1000))
    direct = search_records(SearchPlan(3, 10**7, limit=1000, strategy=Strategy.DIRECT))
    assert len(auto) == 1785
    assert [(r.p, r.quotient) for r in auto] == [(r.p, r.quotient) for r in direct]


@pytest.mark.parametrize("strategy", [Strategy.GOLDEN, Strategy.SUMSIEVE])
def test_forced_strategies_agree(strategy):
    base = search_records(SearchPlan(10**9, 10**9 + 10**6, limit=3000, strategy=Strategy.DIRECT))
    got = search_records(SearchPlan(10**9, 10**9 + 10**6, limit=3000, strategy=strategy))
    assert [(r.p, r.quotient) for r in got] == [(r.p, r.quotient) for r in base]


def test_schemes_agree():
    res = {s: search_records(SearchPlan(10**8, 10**8 + 10**6, limit=5000, strategy=Strategy.DIRECT, scheme=s))
           for s in ("fiblucas", "twosquares", "forster")}
    keys = [[(r.p, r.quotient) for r in v] for v in res.values()]
    assert keys[0] == keys[1] == keys[2] and keys[0]


def test_workers_deterministic():
    plan1 = SearchPlan(3, 4 * 10**6, limit=50, window=10**6)
    plan2 = SearchPlan(3, 4 * 10**6, limit=50, window=10**6, workers=2)
    assert search_records(plan1) == search_records(plan2)


def test_prime_counts_match_sympy():
    lo, hi = 10**9, 10**9 + 2 * 10**6
    res = list(run_search(SearchPlan(lo, hi, limit=1)))
    assert sum(r.n_primes for r in res) == sympy.primepi(hi) - sympy.primepi(lo - 1)
    assert sum(r.composites for r in res) == 0


def test_auto_sieve_limit_records_are_prime():
    recs = search_records(SearchPlan(10**10, 10**10 + 10**6, limit=10**7, sieve_limit="auto"))
    assert recs and all(sympy.isprime(r.p) for r in recs)
    full = search_records(SearchPlan(10**10, 10**10 + 10**6, limit=10**7))
    assert [(r.p, r.quotient) for r in recs] == [(r.p, r.quotient) for r in full]


def test_checkpoint_resume(tmp_path):
    ckpt = str(tmp_path / "run.ckpt")
    plan = SearchPlan(3, 3 * 10**5, limit=10, window=10**5)
    first = run_search(plan, checkpoint=ckpt)
    next(first)
    first.close()
    assert set(read_checkpoint(ckpt)) == {0}
    rest = list(run_search(plan, checkpoint=ckpt))
    assert [r.window for r in rest] == [1, 2]
    assert set(read_checkpoint(ckpt)) == {0, 1, 2}
    assert list(run_search(plan, checkpoint=ckpt)) == []


def test_checkpoint_atomic(tmp_path, monkeypatch):
    path = str(tmp_path / "c.ckpt")
    write_checkpoint(path, [Checkpoint(0, "done", 5)])

    def boom(*a, **k):
        raise OSError("disk gone")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        write_checkpoint(path, [Checkpoint(0, "done", 5), Checkpoint(1, "done", 7)])
    assert open(path).read() == "win=0 state=done n_primes=5\n"


def test_checkpoint_ignores_unfinished(tmp_path):
    path = tmp_path / "c.ckpt"
    path.write_text("win=0 state=done n_primes=5\nwin=1 state=running n_primes=0\n")
    assert set(read_checkpoint(str(path))) == {0}


def test_exceptional_path(monkeypatch):
    real = S._quotients_direct

    def fake(ps, scheme):
        q = real(ps, scheme)
        q[ps == 13] = 0
        return q

    monkeypatch.setattr(S, "_quotients_direct", fake)
    monkeypatch.setattr(S, "verify_zero", lambda p: p == 13)
    res = list(run_search(SearchPlan(3, 100, limit=10)))
    assert res[0].exceptional == [13]
    assert QuotientRecord(13, 0, 13, "direct", 0) in res[0].records


def test_unconfirmed_zero_dropped(monkeypatch):
    real = S._quotients_direct

    def fake(ps, scheme):
        q = real(ps, scheme)
        q[ps == 13] = 0
        return q

    monkeypatch.setattr(S, "_quotients_direct", fake)
    res = list(run_search(SearchPlan(3, 100, limit=10)))
    assert res[0].exceptional == []
    assert all(r.p != 13 for r in res[0].records)


def test_probe():
    assert probe(82789107950701) == -42
    assert probe(67166190593) == 1
    assert probe(11634179, Convention.POSITIVE) == 2
    for bad in (5, 2, 371):
        with pytest.raises(ValueError):
            probe(bad)


def test_prefix_banner():
    assert S.prefix_banner(7).startswith("prefix=")
    assert "F=" in S.prefix_banner(10**13 + 37)


def test_golden_kernel_rejects_composites():
    # composites prime to 10 in the split classes, including Carmichael numbers
    comp = [n for n in range(10**6, 10**6 + 20000) if n % 5 in (1, 4) and n % 2 and not sympy.isprime(n)]
    comp += [41041, 62745, 63973, 101101, 126217, 172081, 188461, 825265]
    ps = np.array([n for n in comp if n % 5 in (1, 4) and n % 2], dtype=np.int64)
    assert (S._quotients_golden(ps) == -1).all()
    # the direct kernel only tests n | F_{n -+ 1}; Fibonacci pseudoprimes pass it
    q = S._quotients_direct(ps, "fiblucas")
    for n in ps[q != -1].tolist():
        assert fib_pair_mod(n - 1, n)[0] == 0
        assert not confirm_prime(n)
