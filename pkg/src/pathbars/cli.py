"""Command-line interface.

Exit codes: 0 success, 2 bad flags / files / configuration, 3 statistical
check failure (check-type experiments and stability runs).
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigError, DomainError, InsufficientDataError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECK_FAILED = 3


def _add_process_flags(sub):
    sub.add_argument("--family", required=True, help="process family name")
    sub.add_argument("--t", type=float, default=1.0, help="time horizon")
    sub.add_argument("--n-steps", type=int, default=1000, help="grid steps")
    sub.add_argument("--mu", type=float, default=0.0)
    sub.add_argument("--sigma", type=float, default=1.0)
    sub.add_argument("--theta", type=float, default=1.0)
    sub.add_argument("--hurst", type=float, default=0.5)
    sub.add_argument("--n-modes", type=int, default=0)
    sub.add_argument("--n-samples", type=int, default=0)
    sub.add_argument("--qv-times", type=str, default=None, help="comma list")
    sub.add_argument("--qv-values", type=str, default=None, help="comma list")


def _spec_from_args(args):
    from .simulate import ProcessSpec

    kwargs = dict(
        t=args.t,
        n_steps=args.n_steps,
        mu=args.mu,
        sigma=args.sigma,
        theta=args.theta,
        hurst=args.hurst,
        n_modes=args.n_modes,
        n_samples=args.n_samples,
    )
    if args.qv_times is not None:
        kwargs["qv_times"] = tuple(float(v) for v in args.qv_times.split(","))
    if args.qv_values is not None:
        kwargs["qv_values"] = tuple(float(v) for v in args.qv_values.split(","))
    return ProcessSpec(args.family, **kwargs)


def _cmd_simulate(args):
    from .paths import write_path_csv
    from .simulate import Seed, sample

    spec = _spec_from_args(args)
    path = sample(spec, Seed(args.seed), args.trial)
    with open(args.out, "w") as fh:
        write_path_csv(path, fh)
    print(f"wrote {path.n_samples} samples to {args.out}")
    return EXIT_OK


def _read_path(path_file):
    from .paths import read_path_csv

    with open(path_file, "r") as fh:
        return read_path_csv(fh)


def _cmd_barcode(args):
    from .persistence import barcode, write_barcode_csv, write_diagram_csv

    bc = barcode(_read_path(args.input))
    with open(args.out, "w") as fh:
        write_barcode_csv(bc, fh)
    print(f"wrote {bc.n_bars} bars to {args.out}")
    if args.diagram is not None:
        with open(args.diagram, "w") as fh:
            write_diagram_csv(bc, args.convention, fh)
        print(f"wrote diagram ({args.convention}) to {args.diagram}")
    return EXIT_OK


def _cmd_count(args):
    from .persistence import barcode, count_eps, count_eps_crossings, count_rect

    f = _read_path(args.input)
    if args.x is None:
        n_bars = count_eps(barcode(f), args.eps)
        n_scan = count_eps_crossings(f, args.eps)
        if n_bars != n_scan:
            print(
                f"internal error: barcode route {n_bars} != crossing route {n_scan}",
                file=sys.stderr,
            )
            return 1
        print(n_bars)
    else:
        print(count_rect(f, args.x, args.eps))
    return EXIT_OK


def _cmd_analytic(args):
    from . import analytic

    tol = args.tol
    if args.formula == "neps-bm":
        large = args.eps / (args.t ** 0.5) >= 1.0
        res = (
            analytic.expected_neps_bm_large(args.eps, args.t, tol)
            if large
            else analytic.expected_neps_bm_small(args.eps, args.t, tol)
        )
    elif args.formula == "nrect-bm":
        if args.x is None:
            raise DomainError("nrect-bm requires --x")
        res = analytic.expected_nrect_bm(args.x, args.eps, args.t, tol)
    elif args.formula == "range-tail":
        res = analytic.range_tail_bm(args.eps, args.t, tol)
    elif args.formula == "drift-nrect":
        from .analytic import SeriesResult

        value = analytic.expected_nrect_drift_ray(args.mu, args.eps)
        res = SeriesResult(value=value, terms_used=1, truncation_bound=0.0)
    else:
        raise DomainError(f"unknown formula {args.formula!r}")
    print("value,terms_used,truncation_bound")
    print(f"{res.value!r},{res.terms_used},{res.truncation_bound!r}")
    return EXIT_OK


def _cmd_experiment(args):
    from .config import load_config_file
    from .harness import run

    cfg = load_config_file(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out_dir is not None:
        overrides["out_dir"] = args.out_dir
    if args.format is not None:
        overrides["fmt"] = args.format
    if overrides:
        import dataclasses

        cfg = dataclasses.replace(cfg, **overrides)
    result = run(cfg)
    print(f"wrote {result.csv_path}")
    if result.svg_path:
        print(f"wrote {result.svg_path}")
    if result.passed is False:
        print("statistical check FAILED", file=sys.stderr)
        return EXIT_CHECK_FAILED
    if result.passed is True:
        print("statistical check passed")
    return EXIT_OK


def _cmd_stability(args):
    from .paths import sup_distance
    from .simulate import Seed, bm, coupled_pair
    from .stability import stability_bound_check

    seed = Seed(args.seed)
    fine = bm(args.t, args.n_steps)
    coarse = bm(args.t, args.n_steps // args.stride)
    failures = 0
    rows = []
    for trial in range(args.trials):
        f, g = coupled_pair(fine, coarse, seed, trial)
        delta = sup_distance(f, g)
        rep = stability_bound_check(f, g, args.eps_mult * delta)
        failures += 0 if rep.passed else 1
        rows.append(rep)
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write("trial,delta,eps,lhs,rhs,pass\n")
            for i, rep in enumerate(rows):
                fh.write(
                    f"{i},{rep.delta!r},{rep.eps!r},{rep.lhs},{rep.rhs},"
                    f"{'true' if rep.passed else 'false'}\n"
                )
            fh.write(f"summary,,,,{failures},{'true' if failures == 0 else 'false'}\n")
    print(f"{args.trials - failures}/{args.trials} pairs satisfied the bound")
    return EXIT_OK if failures == 0 else EXIT_CHECK_FAILED


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pathbars",
        description=(
            "Bar statistics of sampled paths: simulation, exact counts, "
            "closed forms and Monte Carlo experiments."
        ),
        epilog=(
            "Worker count resolution: the PATHBARS_WORKERS environment "
            "variable overrides any --workers flag or config value."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample one path and write a path CSV (t,value)")
    _add_process_flags(p)
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--trial", type=int, default=0, help="trial index")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("barcode", help="path CSV in, barcode CSV (birth,death,length) out")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--diagram", default=None, help="also write a diagram CSV (b,d,convention)")
    p.add_argument(
        "--convention", default="superlevel", choices=("superlevel", "sublevel")
    )
    p.set_defaults(func=_cmd_barcode)

    p = sub.add_parser("count", help="print a bar count of a path CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--eps", type=float, required=True, help="bar length threshold")
    p.add_argument("--x", type=float, default=None, help="count bars spanning [x, x+eps]")
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("analytic", help="evaluate a closed-form value, print CSV")
    p.add_argument(
        "formula", choices=("neps-bm", "nrect-bm", "range-tail", "drift-nrect")
    )
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=_cmd_analytic)

    p = sub.add_parser("experiment", help="run an experiment from a config file")
    p.add_argument("--config", required=True, help="INI config (see README schema)")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--workers", type=int, default=None, help="override config workers")
    p.add_argument("--out-dir", default=None, help="override output directory")
    p.add_argument("--format", default=None, choices=("csv", "svg", "both"))
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser(
        "stability", help="pairwise bound checks on coupled (fine, coarsened) Brownian paths"
    )
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--n-steps", type=int, default=100_000)
    p.add_argument("--stride", type=int, default=100)
    p.add_argument("--eps-mult", type=float, default=4.0, help="eps as multiple of delta")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None, help="per-trial report CSV")
    p.set_defaults(func=_cmd_stability)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, InsufficientDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
