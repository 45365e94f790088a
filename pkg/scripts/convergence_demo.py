#!/usr/bin/env python3
"""Limiting-process demos.

Part 1: sine-series partial sums coupled to a high-mode reference; the
expected count gap against the continuity-modulus bound for growing mode
counts.  Part 2: uniform empirical processes approaching the bridge count
in distribution.

Usage:
    python3 scripts/convergence_demo.py [--trials 400] [--eps 0.5]
"""

import argparse
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from pathbars import simulate, stability


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=400)
    parser.add_argument("--eps", type=float, default=0.5)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()
    seed = simulate.Seed(args.seed)

    print(f"sine partial sums vs 4096 modes at eps={args.eps}")
    for n_modes in (16, 64, 256, 1024):
        rep = stability.convergence_experiment(
            simulate.levy_partial_sum(n_modes, 4096),
            simulate.levy_partial_sum(4096, 4096),
            args.eps,
            args.trials,
            seed,
            args.workers,
        )
        bound = "vacuous" if math.isinf(rep.omega_bound) else f"{rep.omega_bound:7.3f}"
        print(
            f"  n={n_modes:5d}: E|dN|={rep.mean_abs_dn:6.3f}"
            f"  delta_hat={rep.delta_hat:.4f}  omega(2 delta)={bound}"
            f"  ok={rep.passed}"
        )

    print("empirical process vs bridge at eps=0.3")
    trend = stability.empirical_bridge_trend(
        [100, 1000, 10_000], 0.3, args.trials, seed, args.workers
    )
    print(f"  bridge mean: {trend.bridge_mean:.3f} +- {trend.bridge_stderr:.3f}")
    for row in trend.rows:
        print(
            f"  n={row.n_samples:6d}: mean={row.mean:.3f} +- {row.stderr:.3f}"
            f"  gap={row.gap:.3f}"
        )
    print(f"  monotone within CIs: {trend.monotone_within_ci}")


if __name__ == "__main__":
    main()
