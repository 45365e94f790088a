"""Experiment runner: validated configs in, CSV (and SVG) artifacts out.

Result CSVs carry the columns
statistic,param1,param2,mean,stderr,ci_lo,ci_hi,trials,seed first, with
experiment-specific columns appended; floats are written with repr so the
bytes are identical across runs and worker counts.  Check-type experiments
(tail, stability, moment-bound) report pass/fail; the CLI turns a failed
check into exit code 3.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import analytic, estimators, stability
from .config import ExperimentConfig
from .errors import ConfigError
from .paths import SampledPath
from .simulate import Seed, bm, coupled_pair, levy_partial_sum

__all__ = ["ExperimentResult", "run"]

CHECK_KINDS = ("tail", "stability", "moment-bound")


@dataclass(frozen=True)
class ExperimentResult:
    kind: str
    csv_path: str
    svg_path: Optional[str]
    passed: Optional[bool]  # None for report-only kinds
    rows: tuple


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float) or isinstance(value, np.floating):
        return repr(float(value))
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _base_row(result: estimators.MCResult, param1, param2=""):
    return [
        result.statistic,
        param1,
        param2,
        result.mean,
        result.stderr,
        result.ci95[0],
        result.ci95[1],
        result.trials,
        result.seed.master,
    ]


BASE_HEADER = [
    "statistic",
    "param1",
    "param2",
    "mean",
    "stderr",
    "ci_lo",
    "ci_hi",
    "trials",
    "seed",
]


def _qv_at_horizon(spec):
    """Deterministic quadratic variation at t for families that have one."""
    if spec.family == "bm":
        return spec.t
    if spec.family == "ito_constant" and spec.mu == 0.0:
        return spec.sigma**2 * spec.t
    if spec.family == "time_changed_bm":
        return float(np.interp(spec.t, spec.qv_times, spec.qv_values))
    return None


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _run_expect_neps(cfg, seed, workers):
    _require(cfg.eps, "grid.eps: expect-neps needs at least one eps")
    qv = _qv_at_horizon(cfg.process)
    rows = []
    for eps in cfg.eps:
        res = estimators.mc_expectation(
            cfg.process, estimators.neps(eps), cfg.trials, seed, workers, with_envelope=True
        )
        ana = analytic.expected_neps_bm(eps, qv=qv) if qv is not None else None
        env = res.envelope or (None, None)
        rows.append(_base_row(res, eps) + [ana, env[0], env[1], res.delta_hat])
    header = BASE_HEADER + ["analytic", "env_lo", "env_hi", "delta_hat"]
    overlay = None
    if qv is not None:
        grid = np.geomspace(min(cfg.eps), max(cfg.eps), 128)
        overlay = (grid, [analytic.expected_neps_bm(e, qv=qv) for e in grid], "closed form")
    plot = ([r[1] for r in rows], [r[3] for r in rows], [r[4] for r in rows], overlay)
    return header, rows, None, plot


def _run_expect_nrect(cfg, seed, workers):
    _require(cfg.eps, "grid.eps: expect-nrect needs at least one eps")
    _require(cfg.x is not None, "grid.x: expect-nrect needs a level x")
    rows = []
    for eps in cfg.eps:
        res = estimators.mc_expectation(
            cfg.process,
            estimators.nrect(cfg.x, eps),
            cfg.trials,
            seed,
            workers,
            with_envelope=True,
        )
        ana = (
            analytic.expected_nrect_bm(cfg.x, eps, cfg.process.t).value
            if cfg.process.family == "bm" and cfg.x > 0
            else None
        )
        env = res.envelope or (None, None)
        rows.append(_base_row(res, cfg.x, eps) + [ana, env[0], env[1], res.delta_hat])
    header = BASE_HEADER + ["analytic", "env_lo", "env_hi", "delta_hat"]
    plot = ([r[2] for r in rows], [r[3] for r in rows], [r[4] for r in rows], None)
    return header, rows, None, plot


def _run_tail(cfg, seed, workers):
    _require(len(cfg.eps) == 1, "grid.eps: tail needs exactly one eps")
    eps = cfg.eps[0]
    res = estimators.tail_ratio(cfg.process, eps, cfg.trials, seed, workers)
    p = analytic.range_tail_bm(eps, cfg.process.t).value
    lo, hi = estimators.tail_ratio_bounds(p)
    ok = res.mean >= lo - 3 * res.stderr and res.mean <= hi + 3 * res.stderr
    rows = [_base_row(res, eps) + [p, lo, hi, ok]]
    header = BASE_HEADER + ["p_series", "envelope_lo", "envelope_hi", "pass"]
    return header, rows, ok, None


def _run_slope(cfg, seed, workers):
    _require(len(cfg.eps) >= 4, "grid.eps: slope needs a geometric grid of >= 4 points")
    eps_grid = np.asarray(cfg.eps)
    counts = estimators.counts_over_grid(cfg.process, eps_grid, cfg.trials, seed, workers)
    means = counts.mean(axis=0)
    stderrs = counts.std(ddof=1, axis=0) / math.sqrt(cfg.trials)
    slope, slope_se = estimators.variation_slope(cfg.process, eps_grid, cfg.trials, seed, workers)
    rows = []
    for eps, m, se in zip(cfg.eps, means, stderrs):
        rows.append(
            [
                f"neps(eps={eps:g})",
                eps,
                "",
                m,
                se,
                m - 1.96 * se,
                m + 1.96 * se,
                cfg.trials,
                seed.master,
                "",
                "",
            ]
        )
    rows.append(
        ["slope", "", "", slope, slope_se, slope - 1.96 * slope_se, slope + 1.96 * slope_se,
         cfg.trials, seed.master, "", ""]
    )
    header = BASE_HEADER + ["extra1", "extra2"]
    plot = (list(cfg.eps), list(means), list(stderrs), None)
    return header, rows, None, plot


def _run_localtime(cfg, seed, workers):
    _require(cfg.eps, "grid.eps: localtime needs at least one eps")
    _require(cfg.x is not None, "grid.x: localtime needs a level x")
    spec = cfg.process
    ana = None
    if spec.family == "bm":
        qv = SampledPath([0.0, spec.t], [0.0, spec.t])
        ana = analytic.expected_local_time_ito(
            cfg.x, qv, lambda x, s: analytic.gaussian_density(x, s)
        )
    elif spec.family == "ito_constant":
        var = spec.sigma**2
        if var > 0:
            qv = SampledPath([0.0, spec.t], [0.0, var * spec.t])
            mu = spec.mu
            ana = analytic.expected_local_time_ito(
                cfg.x,
                qv,
                lambda x, s: analytic.gaussian_density(x - mu * s / var, s) / math.sqrt(var),
            )
    rows = []
    for eps in cfg.eps:
        res = estimators.mc_expectation(
            cfg.process, estimators.local_time_proxy(cfg.x, eps), cfg.trials, seed, workers
        )
        rows.append(_base_row(res, cfg.x, eps) + [ana])
    header = BASE_HEADER + ["analytic_local_time"]
    return header, rows, None, None


def _run_qv(cfg, seed, workers):
    _require(cfg.eps, "grid.eps: qv needs at least one eps")
    qv_true = _qv_at_horizon(cfg.process)
    rows = []
    for eps in cfg.eps:
        res = estimators.mc_expectation(
            cfg.process, estimators.qv_proxy(eps), cfg.trials, seed, workers
        )
        rows.append(_base_row(res, eps) + [qv_true])
    header = BASE_HEADER + ["qv_true"]
    return header, rows, None, None


def _run_stability(cfg, seed, workers):
    _require(cfg.variant is not None, "grid.variant: stability needs a variant")
    rows = []
    ok = True
    if cfg.variant == "levy":
        _require(len(cfg.eps) == 1, "grid.eps: stability/levy needs exactly one eps")
        _require(cfg.n, "grid.n: stability/levy needs approximant mode counts")
        target_modes = cfg.target or 4096
        steps = max(cfg.process.n_steps, target_modes)
        for n_modes in cfg.n:
            rep = stability.convergence_experiment(
                levy_partial_sum(n_modes, n_steps=steps),
                levy_partial_sum(target_modes, n_steps=steps),
                cfg.eps[0],
                cfg.trials,
                seed,
                workers,
                a_grid=cfg.a,
            )
            ok = ok and rep.passed
            rows.append(
                [
                    f"levy(n={n_modes})",
                    n_modes,
                    cfg.eps[0],
                    rep.mean_abs_dn,
                    rep.stderr_abs_dn,
                    rep.delta_hat,
                    rep.delta_max,
                    cfg.trials,
                    seed.master,
                    rep.omega_bound,
                    rep.passed,
                ]
            )
        header = BASE_HEADER[:5] + ["delta_hat", "delta_max", "trials", "seed", "omega", "pass"]
    elif cfg.variant == "coarsen":
        _require(len(cfg.eps) == 1, "grid.eps: stability/coarsen needs exactly one eps (multiplier of delta)")
        _require(cfg.target, "grid.target: stability/coarsen needs target coarse steps")
        mult = cfg.eps[0]
        coarse = bm(cfg.process.t, cfg.target)
        failures = 0
        for trial in range(cfg.trials):
            fine_path, coarse_path = coupled_pair(cfg.process, coarse, seed, trial)
            from .paths import sup_distance

            delta = sup_distance(fine_path, coarse_path)
            rep = stability.stability_bound_check(fine_path, coarse_path, mult * delta)
            failures += 0 if rep.passed else 1
            rows.append(
                [
                    "stability_bound",
                    trial,
                    mult,
                    rep.delta,
                    "",
                    rep.lhs,
                    rep.rhs,
                    cfg.trials,
                    seed.master,
                    "",
                    rep.passed,
                ]
            )
        ok = failures == 0
        rows.append(
            ["summary", "", mult, failures, "", "", "", cfg.trials, seed.master, "", ok]
        )
        header = BASE_HEADER[:3] + ["delta", "unused", "lhs", "rhs", "trials", "seed", "unused2", "pass"]
    elif cfg.variant == "empirical-bridge":
        _require(len(cfg.eps) == 1, "grid.eps: stability/empirical-bridge needs exactly one eps")
        _require(cfg.n, "grid.n: stability/empirical-bridge needs sample sizes")
        rep = stability.empirical_bridge_trend(
            cfg.n, cfg.eps[0], cfg.trials, seed, workers,
            bridge_steps=cfg.target or 2**17,
        )
        for row in rep.rows:
            rows.append(
                [
                    f"empirical(n={row.n_samples})",
                    row.n_samples,
                    cfg.eps[0],
                    row.mean,
                    row.stderr,
                    row.mean - 1.96 * row.stderr,
                    row.mean + 1.96 * row.stderr,
                    cfg.trials,
                    seed.master,
                    row.gap,
                    "",
                ]
            )
        rows.append(
            [
                "bridge",
                "",
                cfg.eps[0],
                rep.bridge_mean,
                rep.bridge_stderr,
                rep.bridge_mean - 1.96 * rep.bridge_stderr,
                rep.bridge_mean + 1.96 * rep.bridge_stderr,
                cfg.trials,
                seed.master,
                "",
                rep.monotone_within_ci,
            ]
        )
        ok = rep.monotone_within_ci
        header = BASE_HEADER + ["gap", "pass"]
    else:
        raise ConfigError(f"grid.variant: unknown stability variant {cfg.variant!r}")
    return header, rows, ok, None


def _run_moment_bound(cfg, seed, workers):
    _require(len(cfg.eps) == 1, "grid.eps: moment-bound needs exactly one eps")
    rep = estimators.moment_bound_check(cfg.process, cfg.eps[0], cfg.trials, seed, workers)
    rows = []
    for row in rep.rows:
        rows.append(
            [
                f"survival(k={row.k})",
                row.k,
                cfg.eps[0],
                row.survival,
                row.stderr,
                "",
                "",
                cfg.trials,
                seed.master,
                row.bound,
                row.passed,
            ]
        )
    rows.append(
        ["p_hat", "", cfg.eps[0], rep.p_hat, "", "", "", cfg.trials, seed.master,
         rep.tightness_k2, rep.passed]
    )
    header = BASE_HEADER + ["bound_or_tightness", "pass"]
    return header, rows, rep.passed, None


def _run_drift_nrect(cfg, seed, workers):
    _require(cfg.eps, "grid.eps: drift-nrect needs at least one eps")
    _require(cfg.x is not None, "grid.x: drift-nrect needs a level x")
    _require(cfg.process.family == "drift_bm", "process.family: drift-nrect needs drift_bm")
    _require(cfg.process.mu > 0, "process.mu: drift-nrect needs positive drift")
    rows = []
    for eps in cfg.eps:
        res = estimators.mc_expectation(
            cfg.process, estimators.nrect_ray(cfg.x, eps), cfg.trials, seed, workers
        )
        formula = analytic.expected_nrect_drift_ray(cfg.process.mu, eps)
        rel = abs(res.mean - formula) / formula
        rows.append(_base_row(res, cfg.x, eps) + [formula, rel])
    header = BASE_HEADER + ["formula", "rel_err"]
    plot = ([r[2] for r in rows], [r[3] for r in rows], [r[4] for r in rows], None)
    return header, rows, None, plot


_RUNNERS = {
    "expect-neps": _run_expect_neps,
    "expect-nrect": _run_expect_nrect,
    "tail": _run_tail,
    "slope": _run_slope,
    "localtime": _run_localtime,
    "qv": _run_qv,
    "stability": _run_stability,
    "moment-bound": _run_moment_bound,
    "drift-nrect": _run_drift_nrect,
}


def run(cfg: ExperimentConfig) -> ExperimentResult:
    """Execute one experiment; writes CSV (and SVG when requested)."""
    seed = Seed(cfg.seed)
    runner = _RUNNERS.get(cfg.kind)
    if runner is None:
        raise ConfigError(f"experiment.kind: unknown kind {cfg.kind!r}")
    header, rows, passed, plot = runner(cfg, seed, cfg.workers)
    os.makedirs(cfg.out_dir, exist_ok=True)
    stem = cfg.kind.replace("-", "_")
    csv_path = os.path.join(cfg.out_dir, f"{stem}.csv")
    _write_csv(csv_path, header, rows)
    svg_path = None
    if cfg.fmt in ("svg", "both") and plot is not None:
        from .plots import loglog_svg

        x, y, yerr, overlay = plot
        svg_path = os.path.join(cfg.out_dir, f"{stem}.svg")
        loglog_svg(
            svg_path,
            x,
            y,
            yerr=yerr,
            overlay=overlay,
            xlabel="eps",
            ylabel="mean",
            title=f"{cfg.kind}: {cfg.process.fingerprint()}",
        )
    return ExperimentResult(
        kind=cfg.kind,
        csv_path=csv_path,
        svg_path=svg_path,
        passed=passed,
        rows=tuple(tuple(r) for r in rows),
    )
