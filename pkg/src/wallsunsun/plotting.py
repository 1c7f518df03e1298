"""Figures for search and statistics reports (written to files, Agg backend)."""

from __future__ import annotations

import math
import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .heuristics import expected_quotient_count  # noqa: E402


def _save(fig, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def quotient_histogram(quotients: Sequence[int], path: str, limit: int | None = None) -> str:
    """Bar chart of how often each small quotient occurs."""
    qs = np.asarray(quotients, dtype=np.int64)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    if len(qs):
        vals, counts = np.unique(qs, return_counts=True)
        ax.bar(vals, counts, width=0.8, color="tab:blue")
    if limit is not None:
        ax.set_xlim(-limit, limit)
    ax.set_xlabel("quotient")
    ax.set_ylabel("primes")
    ax.set_title(f"Small Fibonacci quotients ({len(qs)} records)")
    return _save(fig, path)


def records_scatter(ps: Sequence[int], quotients: Sequence[int], path: str) -> str:
    """Quotient against p on a logarithmic p axis."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    if len(ps):
        ax.scatter(np.asarray(ps, dtype=np.float64), quotients, s=12, color="tab:red")
        ax.set_xscale("log")
    ax.axhline(0, color="grey", lw=0.6)
    ax.set_xlabel("p")
    ax.set_ylabel("quotient")
    ax.set_title("Records")
    return _save(fig, path)


def cumulative_vs_expected(ps: Sequence[int], width: int, lo: int, path: str) -> str:
    """Running record count against width * (log log p - log log lo).

    ``width`` is the number of admissible quotient values (2L - 1 for
    |q| < L, L for 0 <= q < L).
    """
    ps = np.sort(np.asarray(ps, dtype=np.float64))
    lo = max(lo, 10)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    if len(ps):
        ax.step(ps, np.arange(1, len(ps) + 1), where="post", label="found")
        grid = np.geomspace(lo + 1, max(ps[-1], lo + 2), 200)
        ax.plot(grid, [expected_quotient_count(lo, x, width) for x in grid], label="expected")
        ax.set_xscale("log")
        ax.legend()
    ax.set_xlabel("p")
    ax.set_ylabel("records up to p")
    return _save(fig, path)


def window_counts(windows: Sequence[int], n_primes: Sequence[int], path: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(windows, n_primes, color="tab:green")
    ax.set_xlabel("window")
    ax.set_ylabel("primes tested")
    return _save(fig, path)


def q_stats_bars(stats: dict[str, tuple[int, int]], path: str) -> str:
    """Fraction of primes with Q(p) = 1 per class, with the counts as labels."""
    names = list(stats)
    frac = [q1 / n if n else math.nan for n, q1 in stats.values()]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    bars = ax.bar(names, frac, color=["tab:blue", "tab:orange"][: len(names)])
    for bar, (n, q1) in zip(bars, stats.values()):
        ax.annotate(f"{q1}/{n}", (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                    ha="center", va="bottom", fontsize=8)
    ax.set_ylabel("share with Q(p) = 1")
    ax.set_ylim(0, 1)
    return _save(fig, path)


def mertens_curve(ns: Sequence[int], sums: Sequence[float], a: float, path: str) -> str:
    """Partial sums of 1/p against log log n + A."""
    ns = np.asarray(ns, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(ns, sums, "o-", label="sum 1/p")
    ax.plot(ns, np.log(np.log(ns)) + a, "--", label="log log n + A")
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.legend()
    return _save(fig, path)
