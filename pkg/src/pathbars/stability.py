"""Stability of bar counts under sup-norm perturbations.

The matching argument gives, for any two paths with sup distance delta and
any eps > 2 delta, the deterministic sandwich
N^{eps+2delta}_f <= N^eps_g <= N^{eps-2delta}_f, hence
|N^eps_g - N^eps_f| <= N^{eps-2delta}_f - N^{eps+2delta}_f.  These checks
are exact on PL paths; a failure is an implementation bug, never noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from ._parallel import chunk_ranges, pool_map, resolve_workers
from .analytic import expected_neps_bm
from .errors import DomainError
from .estimators import MCResult, _mean_stderr
from .paths import SampledPath, sup_distance
from .simulate import ProcessSpec, Seed, coupled_pair, sample

__all__ = [
    "StabilityReport",
    "stability_bound_check",
    "modulus_omega_exact",
    "modulus_omega",
    "ConvergenceReport",
    "MarkovRow",
    "convergence_experiment",
    "empirical_bridge_trend",
]


@dataclass(frozen=True)
class StabilityReport:
    delta: float
    eps: float
    lhs: int
    rhs: int
    n_f: int
    n_g: int
    passed: bool


def stability_bound_check(f: SampledPath, g: SampledPath, eps) -> StabilityReport:
    """Exact check of |N^eps_g - N^eps_f| <= N^{eps-2d}_f - N^{eps+2d}_f."""
    eps = float(eps)
    delta = sup_distance(f, g)
    if not eps > 2.0 * delta:
        raise DomainError(f"need eps > 2*sup_distance = {2 * delta:g}, got {eps:g}")
    n_f = _kernels.drawdown_count(f.values, eps)
    n_g = _kernels.drawdown_count(g.values, eps)
    wide = _kernels.drawdown_count(f.values, eps + 2.0 * delta)
    narrow = _kernels.drawdown_count(f.values, eps - 2.0 * delta)
    lhs = abs(n_g - n_f)
    rhs = narrow - wide
    return StabilityReport(
        delta=delta, eps=eps, lhs=lhs, rhs=rhs, n_f=n_f, n_g=n_g, passed=lhs <= rhs
    )


def modulus_omega_exact(eps, delta, qv) -> float:
    """Continuity modulus E[N^{eps-delta} - N^{eps+delta}] from the closed form,
    for Brownian paths run at quadratic-variation clock qv; infinite when
    eps <= delta."""
    if not eps > delta > 0:
        return float("inf")
    return expected_neps_bm(eps - delta, qv=qv) - expected_neps_bm(eps + delta, qv=qv)


def _omega_chunk(args):
    spec, eps, delta, seed, start, stop = args
    out = np.empty(stop - start)
    for i, trial in enumerate(range(start, stop)):
        values = sample(spec, seed, trial).values
        out[i] = _kernels.drawdown_count(values, eps - delta) - _kernels.drawdown_count(
            values, eps + delta
        )
    return out


def modulus_omega(spec: ProcessSpec, eps, delta, trials, seed: Seed, workers=None) -> MCResult:
    """Monte Carlo estimate of the continuity modulus omega_eps(delta)."""
    if not eps > delta > 0:
        raise DomainError("need eps > delta > 0")
    workers = resolve_workers(workers)
    tasks = [(spec, float(eps), float(delta), seed, a, b) for a, b in chunk_ranges(trials)]
    vals = np.concatenate(pool_map(_omega_chunk, tasks, workers))
    mean, stderr = _mean_stderr(vals)
    return MCResult(
        statistic=f"omega(eps={eps:g},delta={delta:g})",
        mean=mean,
        stderr=stderr,
        trials=trials,
        ci95=(mean - 1.96 * stderr, mean + 1.96 * stderr),
        seed=seed,
        spec_fingerprint=spec.fingerprint(),
    )


@dataclass(frozen=True)
class MarkovRow:
    a: float
    k: int
    survival: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class ConvergenceReport:
    eps: float
    trials: int
    mean_abs_dn: float
    stderr_abs_dn: float
    delta_hat: float
    delta_max: float
    omega_bound: float
    expectation_ok: bool
    markov_rows: tuple
    markov_ok: bool
    passed: bool


def _coupled_chunk(args):
    spec_a, spec_b, eps, seed, start, stop = args
    out = np.empty((stop - start, 2))
    for i, trial in enumerate(range(start, stop)):
        fa, fb = coupled_pair(spec_a, spec_b, seed, trial)
        na = _kernels.drawdown_count(fa.values, eps)
        nb = _kernels.drawdown_count(fb.values, eps)
        out[i, 0] = abs(na - nb)
        out[i, 1] = sup_distance(fa, fb)
    return out


def convergence_experiment(
    spec_approx: ProcessSpec,
    spec_target: ProcessSpec,
    eps,
    trials,
    seed: Seed,
    workers=None,
    qv_proxy: float = 1.0,
    a_grid=(2.0, 4.0, 8.0),
    p: float = 2.0,
) -> ConvergenceReport:
    """Coupled-pair convergence check for a supported coupling.

    Estimates E|N^eps_approx - N^eps_target| and the realized mean sup
    distance delta_hat, then checks the expectation bound against the exact
    modulus omega_eps(2 delta_hat) of a Brownian path at clock qv_proxy, and
    the Markov tail bounds survival(k) <= omega_eps(2 a delta_hat)/k + a^-p
    over the a grid.  Bounds with eps <= 2 a delta_hat are vacuous (inf).
    """
    eps = float(eps)
    if not eps > 0:
        raise DomainError("eps must be positive")
    workers = resolve_workers(workers)
    tasks = [(spec_approx, spec_target, eps, seed, a, b) for a, b in chunk_ranges(trials)]
    mat = np.concatenate(pool_map(_coupled_chunk, tasks, workers), axis=0)
    dn = mat[:, 0]
    mean_dn, se_dn = _mean_stderr(dn)
    delta_hat = float(mat[:, 1].mean())
    delta_max = float(mat[:, 1].max())

    omega = modulus_omega_exact(eps, 2.0 * delta_hat, qv_proxy)
    expectation_ok = mean_dn <= omega + 3.0 * se_dn

    rows = []
    kmax = int(dn.max())
    for a in a_grid:
        omega_a = modulus_omega_exact(eps, 2.0 * a * delta_hat, qv_proxy)
        for k in range(1, kmax + 1):
            surv = float((dn >= k).mean())
            if surv == 0.0:
                break
            se = math.sqrt(surv * (1.0 - surv) / trials)
            bound = omega_a / k + a ** (-p) + 3.0 * se
            rows.append(MarkovRow(a=a, k=k, survival=surv, bound=bound, passed=surv <= bound))
    markov_ok = all(r.passed for r in rows)
    return ConvergenceReport(
        eps=eps,
        trials=trials,
        mean_abs_dn=mean_dn,
        stderr_abs_dn=se_dn,
        delta_hat=delta_hat,
        delta_max=delta_max,
        omega_bound=omega,
        expectation_ok=expectation_ok,
        markov_rows=tuple(rows),
        markov_ok=markov_ok,
        passed=expectation_ok and markov_ok,
    )


def _neps_chunk(args):
    spec, eps, seed, start, stop = args
    out = np.empty(stop - start)
    for i, trial in enumerate(range(start, stop)):
        out[i] = _kernels.drawdown_count(sample(spec, seed, trial).values, eps)
    return out


def _neps_mc(spec, eps, trials, seed, workers):
    tasks = [(spec, float(eps), seed, a, b) for a, b in chunk_ranges(trials)]
    vals = np.concatenate(pool_map(_neps_chunk, tasks, workers))
    return _mean_stderr(vals)


@dataclass(frozen=True)
class TrendRow:
    n_samples: int
    mean: float
    stderr: float
    gap: float  # |mean - bridge mean|


@dataclass(frozen=True)
class TrendReport:
    eps: float
    bridge_mean: float
    bridge_stderr: float
    rows: tuple
    monotone_within_ci: bool


def empirical_bridge_trend(
    n_list, eps, trials, seed: Seed, workers=None, bridge_steps=2**17
) -> TrendReport:
    """Distributional convergence of empirical-process bar counts to the bridge.

    No pathwise coupling exists here, so the check is a trend: the gap
    |E N^eps_emp(n) - E N^eps_bridge| must be nonincreasing in n up to the
    combined confidence-interval slack.  The bridge reference grid must be
    fine enough that its own discretisation deficit is below the gaps being
    compared; the default suits eps >= 0.2.
    """
    from .simulate import bridge as bridge_spec
    from .simulate import empirical_process

    workers = resolve_workers(workers)
    bm_mean, bm_se = _neps_mc(bridge_spec(bridge_steps), eps, trials, seed, workers)
    rows = []
    for n in n_list:
        m, se = _neps_mc(empirical_process(n), eps, trials, seed, workers)
        rows.append(TrendRow(n_samples=n, mean=m, stderr=se, gap=abs(m - bm_mean)))
    ok = True
    for prev, cur in zip(rows, rows[1:]):
        slack = 1.96 * (prev.stderr + cur.stderr + 2.0 * bm_se)
        if cur.gap > prev.gap + slack:
            ok = False
    return TrendReport(
        eps=float(eps),
        bridge_mean=bm_mean,
        bridge_stderr=bm_se,
        rows=tuple(rows),
        monotone_within_ci=ok,
    )
