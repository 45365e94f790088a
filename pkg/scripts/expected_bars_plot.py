#!/usr/bin/env python3
"""Reproduce the log-log expected-bar-count chart.

Monte Carlo means of the bar count over an eps grid for a chosen family,
with the closed-form curve overlaid where one exists (Brownian paths and
random walks share it at matched quadratic variation).

Usage:
    python3 scripts/expected_bars_plot.py
    python3 scripts/expected_bars_plot.py --family rademacher --n-steps 4096
"""

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from pathbars import analytic, estimators, simulate
from pathbars.plots import loglog_svg


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--family", default="bm", choices=("bm", "rademacher"))
    parser.add_argument("--n-steps", type=int, default=100_000)
    parser.add_argument("--trials", type=int, default=400)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", default="out/expected_bars.svg")
    args = parser.parse_args()

    if args.family == "bm":
        spec = simulate.bm(1.0, args.n_steps)
    else:
        spec = simulate.rademacher_walk(args.n_steps)
    eps_grid = np.geomspace(0.05, 2.0, 14)
    counts = estimators.counts_over_grid(
        spec, eps_grid, args.trials, simulate.Seed(args.seed), args.workers
    )
    means = counts.mean(axis=0)
    stderrs = counts.std(ddof=1, axis=0) / np.sqrt(args.trials)

    curve_x = np.geomspace(eps_grid[0], eps_grid[-1], 200)
    curve_y = [analytic.expected_neps_bm(e, 1.0) for e in curve_x]

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    loglog_svg(
        args.out,
        eps_grid,
        means,
        yerr=stderrs,
        overlay=(curve_x, curve_y, "closed form (unit quadratic variation)"),
        xlabel="eps",
        ylabel="mean bar count >= eps",
        title=f"{spec.fingerprint()}, {args.trials} trials",
    )
    for e, m, s in zip(eps_grid, means, stderrs):
        print(f"eps={e:8.4f}  mean={m:10.4f}  se={s:.4f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
