"""Command line interface: ``wallsunsun {search,probe,kappa,quadfield,stats,selftest}``.

Every subcommand writes ``key=value`` lines to stdout; diagnostics go to
stderr.  ``search`` exits with status 2 when an exceptional prime is found.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

EXIT_EXCEPTIONAL = 2


def _int(text: str) -> int:
    """Integers in plain or scientific notation: 20000000, 2e7, 1.6e13."""
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if value != int(value):
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
        return int(value)


def _emit(out, **fields) -> None:
    out.write(" ".join(f"{k}={v}" for k, v in fields.items()) + "\n")


# ---------------------------------------------------------------------------
# search / probe


def cmd_search(args) -> int:
    from . import search as S

    plan = S.SearchPlan(
        lo=args.lo, hi=args.hi, classes=S.parse_classes(args.classes),
        strategy=S.Strategy(args.strategy), window=args.window, limit=args.limit,
        workers=args.workers, convention=S.Convention(args.convention), scheme=args.scheme,
        sieve_limit=args.sieve_limit, golden_crossover=args.golden_crossover,
        sumsieve_crossover=args.sumsieve_crossover,
    )
    ckpt = args.resume or (f"{args.out}.ckpt" if args.out else None)
    resuming = bool(args.resume and os.path.exists(args.resume))
    out = open(args.out, "a" if resuming else "w") if args.out else sys.stdout
    records, windows, counts, exceptional = [], [], [], []
    try:
        for res in S.run_search(plan, checkpoint=ckpt):
            for rec in res.records:
                out.write(rec.line() + "\n")
            out.flush()
            records += res.records
            windows.append(res.window)
            counts.append(res.n_primes)
            exceptional += res.exceptional
            logging.info("win=%d state=done n_primes=%d composites=%d sieve_s=%.2f total_s=%.2f",
                         res.window, res.n_primes, res.composites, res.sieve_seconds, res.total_seconds)
    finally:
        if out is not sys.stdout:
            out.close()
    for p in exceptional:
        _emit(sys.stderr, EXCEPTIONAL=p)
    _emit(sys.stderr, windows=len(windows), n_primes=sum(counts), records=len(records),
          exceptional=len(exceptional))
    if args.figures:
        from . import plotting

        ps = [r.p for r in records]
        qs = [r.quotient for r in records]
        width = 2 * plan.limit - 1 if plan.convention is S.Convention.SIGNED else plan.limit
        paths = [
            plotting.quotient_histogram(qs, os.path.join(args.figures, "quotients.png"), plan.limit),
            plotting.records_scatter(ps, qs, os.path.join(args.figures, "records.png")),
            plotting.cumulative_vs_expected(ps, width, plan.lo, os.path.join(args.figures, "cumulative.png")),
            plotting.window_counts(windows, counts, os.path.join(args.figures, "windows.png")),
        ]
        for p in paths:
            _emit(sys.stderr, figure=p)
    return EXIT_EXCEPTIONAL if exceptional else 0


def cmd_probe(args) -> int:
    from .search import Convention, probe

    code = 0
    for p in args.p:
        q = probe(p, Convention(args.convention))
        _emit(sys.stdout, p=p, q=q, **{"class": p % 40})
        if q == 0:
            code = EXIT_EXCEPTIONAL
    return code


# ---------------------------------------------------------------------------
# kappa


def cmd_kappa(args) -> int:
    from . import wall_kappa as W

    if args.l is not None:
        if args.l <= W.BRUTE_FORCE_LIMIT:
            w = W.kappa_bruteforce(args.l)
        else:
            import sympy

            if not sympy.isprime(args.l):
                raise SystemExit("kappa of a composite above 1e7 is not supported")
            w = W.kappa_prime(args.l)
        _emit(sys.stdout, l=w.l, kappa=w.kappa)
        return 0
    table = W.kappa_table(args.max)
    for l in range(2, args.max + 1):
        _emit(sys.stdout, l=l, kappa=int(table[l]))
    if args.verify:
        rep = W.verify_wall_theorem(args.max)
        _emit(sys.stdout, multiplicative=int(rep.multiplicative), even=int(rep.even),
              six_l_bound=int(rep.six_l_bound), prime_powers=int(rep.prime_powers), lemma=int(rep.lemma),
              lemma_instances=rep.lemma_instances, equality_set=",".join(map(str, rep.equality_set)),
              ok=int(rep.ok))
        return 0 if rep.ok else 1
    return 0


# ---------------------------------------------------------------------------
# quadfield


def cmd_quadfield(args) -> int:
    from . import quadfield as Q

    ds = Q.squarefree_range() if args.d == "all" else [int(args.d)]
    for d in ds:
        ctx = Q.fundamental_unit(d)
        _emit(sys.stderr, d=d, unit=str(ctx).replace(" ", ""), norm=ctx.norm)
        for hit in Q.search_quadfield(d, args.bound, cube_only=args.cube):
            sys.stdout.write(hit.line() + "\n")
    return 0


# ---------------------------------------------------------------------------
# stats


def cmd_stats(args) -> int:
    from . import heuristics as H

    out = sys.stdout
    with H.mp.workdps(25):
        _emit(out, prime_zeta_2=H.mpmath.nstr(H.prime_zeta(2), 21))
    _emit(out, mertens_A=f"{H.MERTENS_A:.15f}")
    c = H.euler_product_constants(args.prime_limit)
    _emit(out, C1=f"{c.C1:.10f}", C2=f"{c.C2:.10f}", C3=f"{c.C3:.10f}", C4=f"{c.C4:.10f}",
          prime_limit=c.prime_limit, tail=f"{c.tail_bound:.2e}")
    _emit(out, expected_exceptional_1e14=f"{H.expected_exceptional(1e14):.6f}")
    for n1, n2, w, mod, extra in ((8e13, 8.5765e13, 2 * 10**7 - 1, 10, 0), (10, 1e12, 10, 1, 2),
                                  (1e11, 1e12, 100, 1, 0)):
        _emit(out, N1=f"{n1:g}", N2=f"{n2:g}", width=w, modulus=mod,
              expected=f"{extra + H.expected_quotient_count(n1, n2, w, mod):.9f}")
    mertens_ns, mertens_sums = [], []
    for n in args.mertens:
        total, ok = H.mertens_check(n)
        mertens_ns.append(n)
        mertens_sums.append(total)
        _emit(out, mertens_n=n, sum_inv_p=f"{total:.15f}", bound_holds="na" if ok is None else int(ok))
    qstats = None
    if args.qstats:
        from .wall_kappa import compute_q_stats

        qstats = compute_q_stats(args.qstats)
        for name, (n, q1) in qstats.by_class().items():
            _emit(out, qstats_bound=args.qstats, cls=name, primes=n, q_eq_1=q1)
    hist = None
    if args.records:
        from .search import QuotientRecord

        with open(args.records) as fh:
            recs = [QuotientRecord.parse(line) for line in fh if line.startswith("p=")]
        hist = H.aggregate_quotients(recs)
        _emit(out, **hist.as_dict())
    if args.figures:
        from . import plotting

        paths = []
        if mertens_ns:
            paths.append(plotting.mertens_curve(mertens_ns, mertens_sums, H.MERTENS_A,
                                                os.path.join(args.figures, "mertens.png")))
        if qstats is not None:
            paths.append(plotting.q_stats_bars(qstats.by_class(), os.path.join(args.figures, "qstats.png")))
        if hist is not None:
            paths.append(plotting.quotient_histogram([r.quotient for r in recs],
                                                     os.path.join(args.figures, "quotients.png")))
        for p in paths:
            _emit(sys.stderr, figure=p)
    return 0


# ---------------------------------------------------------------------------
# selftest


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return 0 if run_selftest(sys.stdout) else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from .search import DEFAULT_LIMIT, DEFAULT_WINDOW, GOLDEN_CROSSOVER, SUMSIEVE_CROSSOVER

    parser = argparse.ArgumentParser(prog="wallsunsun", description="Search for Wall-Sun-Sun primes.")
    parser.add_argument("--log-level", default="WARNING", help="logging level for stderr diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("search", help="search an interval for small Fibonacci quotients")
    s.add_argument("--from", dest="lo", type=_int, required=True)
    s.add_argument("--to", dest="hi", type=_int, required=True)
    s.add_argument("--classes", default=None,
                   help="comma separated classes: 21 (mod 40), 3/10, 11/20; default all mod 40")
    s.add_argument("--limit", type=_int, default=DEFAULT_LIMIT, help="report |quotient| < LIMIT")
    s.add_argument("--window", type=_int, default=DEFAULT_WINDOW, help="integers per window")
    s.add_argument("--strategy", choices=("auto", "direct", "golden", "sumsieve"), default="auto")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", help="record file (checkpoints go to OUT.ckpt unless --resume is given)")
    s.add_argument("--resume", help="checkpoint file; windows marked done are skipped")
    s.add_argument("--convention", choices=("signed", "positive"), default="signed")
    s.add_argument("--scheme", choices=("fiblucas", "twosquares", "forster"), default="fiblucas")
    s.add_argument("--sieve-limit", choices=("complete", "auto"), default="complete")
    s.add_argument("--golden-crossover", type=_int, default=GOLDEN_CROSSOVER,
                   help="height where p = 1, 9 mod 40 switch from golden-ratio powering to direct")
    s.add_argument("--sumsieve-crossover", type=_int, default=SUMSIEVE_CROSSOVER,
                   help="height where p = 21, 29 mod 40 switch from the sum sieve to direct")
    s.add_argument("--figures", metavar="DIR", help="write report figures to DIR")
    s.set_defaults(func=cmd_search)

    p = sub.add_parser("probe", help="quotient of individual primes")
    p.add_argument("p", type=_int, nargs="+")
    p.add_argument("--convention", choices=("signed", "positive"), default="signed")
    p.set_defaults(func=cmd_probe)

    k = sub.add_parser("kappa", help="Wall numbers")
    g = k.add_mutually_exclusive_group(required=True)
    g.add_argument("--max", type=_int, help="table of kappa(l) for 2 <= l <= MAX")
    g.add_argument("--l", type=_int, help="kappa of one modulus")
    k.add_argument("--verify", action="store_true", help="with --max: check Wall's theorem up to MAX")
    k.set_defaults(func=cmd_kappa)

    q = sub.add_parser("quadfield", help="exceptional primes of real quadratic fields")
    q.add_argument("--d", required=True, help="square-free d <= 101, or 'all'")
    q.add_argument("--bound", type=_int, required=True)
    q.add_argument("--cube", action="store_true", help="only primes that also pass modulo p**3")
    q.set_defaults(func=cmd_quadfield)

    st = sub.add_parser("stats", help="heuristic constants and counts")
    st.add_argument("--prime-limit", type=_int, default=2 * 10**6, help="primes used in the Euler products")
    st.add_argument("--mertens", type=_int, nargs="*", default=[286, 10**6])
    st.add_argument("--qstats", type=_int, metavar="BOUND", help="also count Q(p) = 1 up to BOUND")
    st.add_argument("--records", help="record file from search to aggregate")
    st.add_argument("--figures", metavar="DIR", help="write report figures to DIR")
    st.set_defaults(func=cmd_stats)

    t = sub.add_parser("selftest", help="quick end-to-end consistency checks")
    t.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "command", None) == "kappa" and args.verify and args.max is None:
        raise SystemExit("--verify needs --max")
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
