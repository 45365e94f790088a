"""Monte Carlo estimators for the limit theorems on bar statistics.

Estimates are deterministic functions of (spec, statistic, trials, seed):
per-trial values are concatenated in fixed chunk order before reduction, so
the worker count never changes a digit.  Grid-based experiments can also
report a stability envelope: counts re-evaluated with thresholds widened
and narrowed by twice the documented PL interpolation error bound, which
brackets the continuous-process value by the matching argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from ._parallel import chunk_ranges, pool_map, resolve_workers
from .errors import DomainError, InsufficientDataError
from .paths import SampledPath
from .persistence import _bars_arrays
from .simulate import ProcessSpec, Seed, interpolation_sup_error, sample

__all__ = [
    "Statistic",
    "MCResult",
    "neps",
    "nrect",
    "nrect_ray",
    "range_indicator",
    "trimmed",
    "qv_proxy",
    "local_time_proxy",
    "mc_expectation",
    "local_time_estimate",
    "qv_estimate_from_bars",
    "variation_slope",
    "variation_index",
    "tail_ratio",
    "tail_ratio_bounds",
    "moment_bound_check",
    "MomentBoundRow",
    "MomentBoundReport",
]

STAT_KINDS = (
    "neps",
    "nrect",
    "nrect_ray",
    "range_indicator",
    "trimmed",
    "qv_proxy",
    "local_time_proxy",
)
BOOTSTRAP_TRIAL = 2**62  # auxiliary stream index, disjoint from MC trials


@dataclass(frozen=True)
class Statistic:
    kind: str
    eps: float
    x: float = 0.0

    def __post_init__(self):
        if self.kind not in STAT_KINDS:
            raise DomainError(f"unknown statistic kind {self.kind!r}")
        if not self.eps > 0:
            raise DomainError("statistic eps must be positive")

    def label(self) -> str:
        if self.kind in ("nrect", "local_time_proxy"):
            return f"{self.kind}(x={self.x:g},eps={self.eps:g})"
        return f"{self.kind}(eps={self.eps:g})"


def neps(eps) -> Statistic:
    return Statistic("neps", float(eps))


def nrect(x, eps) -> Statistic:
    return Statistic("nrect", float(eps), float(x))


def nrect_ray(x, eps) -> Statistic:
    """Rectangle count in the ray convention: the component that never dies
    (an upward-drifting path truncated at a long horizon) is excluded, which
    leaves exactly the completed downcrossings of the band."""
    return Statistic("nrect_ray", float(eps), float(x))


def range_indicator(eps) -> Statistic:
    return Statistic("range_indicator", float(eps))


def trimmed(eps) -> Statistic:
    return Statistic("trimmed", float(eps))


def qv_proxy(eps) -> Statistic:
    return Statistic("qv_proxy", float(eps))


def local_time_proxy(x, eps) -> Statistic:
    return Statistic("local_time_proxy", float(eps), float(x))


@dataclass(frozen=True)
class MCResult:
    statistic: str
    mean: float
    stderr: float
    trials: int
    ci95: tuple
    seed: Seed
    spec_fingerprint: str
    delta_hat: Optional[float] = None
    envelope: Optional[tuple] = None  # (lower mean, upper mean), nan if undefined


def _eval_stat(values: np.ndarray, stat: Statistic) -> float:
    kind = stat.kind
    if kind == "neps":
        return float(_kernels.drawdown_count(values, stat.eps))
    if kind == "nrect":
        return float(_kernels.rect_count(values, stat.x, stat.eps))
    if kind == "nrect_ray":
        _, d = _kernels.band_crossings(values, stat.x, stat.eps)
        return float(d)
    if kind == "range_indicator":
        return 1.0 if values.max() - values.min() >= stat.eps else 0.0
    if kind == "trimmed":
        births, deaths = _bars_arrays(values)
        return float(np.maximum(births - deaths - stat.eps, 0.0).sum())
    if kind == "qv_proxy":
        return 2.0 * stat.eps**2 * _kernels.drawdown_count(values, stat.eps)
    if kind == "local_time_proxy":
        _, d = _kernels.band_crossings(values, stat.x, stat.eps)
        return 2.0 * stat.eps * d
    raise DomainError(f"unknown statistic kind {kind!r}")


def _envelope_stats(stat: Statistic, delta: float):
    """Widened (lower bound) and narrowed (upper bound) companion statistics."""
    if stat.kind in ("neps", "qv_proxy"):
        lo = Statistic(stat.kind, stat.eps + 2 * delta)
        hi = Statistic(stat.kind, stat.eps - 2 * delta) if stat.eps > 2 * delta else None
        return lo, hi
    if stat.kind == "nrect":
        lo = Statistic("nrect", stat.eps + 2 * delta, stat.x - delta)
        hi = (
            Statistic("nrect", stat.eps - 2 * delta, stat.x + delta)
            if stat.eps > 2 * delta
            else None
        )
        return lo, hi
    return None, None


def _mc_chunk(args):
    spec, stat, seed, start, stop, delta = args
    lo_stat, hi_stat = _envelope_stats(stat, delta) if delta else (None, None)
    ncols = 1 + (lo_stat is not None) + (hi_stat is not None)
    out = np.empty((stop - start, ncols))
    for i, trial in enumerate(range(start, stop)):
        values = sample(spec, seed, trial).values
        out[i, 0] = _eval_stat(values, stat)
        col = 1
        if lo_stat is not None:
            out[i, col] = _eval_stat(values, lo_stat)
            col += 1
        if hi_stat is not None:
            out[i, col] = _eval_stat(values, hi_stat)
    return out


def _collect(spec, stat, trials, seed, workers, delta=None) -> np.ndarray:
    tasks = [(spec, stat, seed, a, b, delta) for a, b in chunk_ranges(trials)]
    chunks = pool_map(_mc_chunk, tasks, workers)
    return np.concatenate(chunks, axis=0)


def _mean_stderr(values: np.ndarray):
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(values.shape[0]))
    return mean, stderr


def mc_expectation(
    spec: ProcessSpec,
    statistic: Statistic,
    trials: int,
    seed: Seed,
    workers=None,
    with_envelope: bool = False,
) -> MCResult:
    """Monte Carlo mean of a path statistic over independent trials.

    with_envelope additionally evaluates the statistic at thresholds moved
    by twice the documented interpolation error bound of the family (where
    one is defined), bracketing the continuous-process expectation.
    """
    if trials < 2:
        raise DomainError("trials must be at least 2")
    workers = resolve_workers(workers)
    delta = interpolation_sup_error(spec) if with_envelope else None
    mat = _collect(spec, statistic, trials, seed, workers, delta)
    mean, stderr = _mean_stderr(mat[:, 0])
    envelope = None
    if delta is not None:
        lo_mean = float(mat[:, 1].mean()) if mat.shape[1] > 1 else float("nan")
        hi_mean = float(mat[:, 2].mean()) if mat.shape[1] > 2 else float("nan")
        envelope = (lo_mean, hi_mean)
    return MCResult(
        statistic=statistic.label(),
        mean=mean,
        stderr=stderr,
        trials=trials,
        ci95=(mean - 1.96 * stderr, mean + 1.96 * stderr),
        seed=seed,
        spec_fingerprint=spec.fingerprint(),
        delta_hat=delta,
        envelope=envelope,
    )


def local_time_estimate(path: SampledPath, x, eps) -> float:
    """Downcrossing estimate of local time at level x: 2 eps D^{x,x+eps}."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    _, d = _kernels.band_crossings(path.values, float(x), float(eps))
    return 2.0 * float(eps) * d


def qv_estimate_from_bars(path: SampledPath, eps) -> float:
    """Quadratic-variation estimate from small bars: 2 eps^2 N^eps."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    births, deaths = _bars_arrays(path.values)
    n = int(np.count_nonzero(births - deaths >= eps))
    return 2.0 * float(eps) ** 2 * n


def _grid_chunk(args):
    spec, eps_grid, seed, start, stop = args
    out = np.empty((stop - start, eps_grid.shape[0]))
    for i, trial in enumerate(range(start, stop)):
        values = sample(spec, seed, trial).values
        births, deaths = _bars_arrays(values)
        lengths = np.sort(births - deaths)
        out[i] = lengths.shape[0] - np.searchsorted(lengths, eps_grid, side="left")
    return out


def counts_over_grid(spec, eps_grid, trials, seed, workers=None) -> np.ndarray:
    """Per-trial bar counts N^eps for every eps in the grid (trials x grid)."""
    workers = resolve_workers(workers)
    eps_grid = np.asarray(eps_grid, dtype=np.float64)
    tasks = [(spec, eps_grid, seed, a, b) for a, b in chunk_ranges(trials)]
    return np.concatenate(pool_map(_grid_chunk, tasks, workers), axis=0)


def variation_slope(spec, eps_grid, trials, seed, workers=None):
    """Least-squares slope of log E[N^eps] against log(1/eps).

    The grid must be geometric with at least 4 points.  The standard error
    comes from 200 bootstrap resamples over trials, drawn from a dedicated
    auxiliary stream.
    """
    eps_grid = np.asarray(eps_grid, dtype=np.float64)
    if eps_grid.shape[0] < 4:
        raise DomainError("eps_grid needs at least 4 points")
    ratios = eps_grid[1:] / eps_grid[:-1]
    if np.any(eps_grid <= 0) or np.ptp(ratios) > 1e-9 * ratios[0]:
        raise DomainError("eps_grid must be geometric (constant ratio)")
    counts = counts_over_grid(spec, eps_grid, trials, seed, workers)
    means = counts.mean(axis=0)
    if np.any(means <= 0):
        raise InsufficientDataError("some grid points saw no bars; shrink eps_grid")
    logx = np.log(1.0 / eps_grid)
    slope = float(np.polyfit(logx, np.log(means), 1)[0])

    rng = seed.stream(BOOTSTRAP_TRIAL)
    idx = rng.integers(0, trials, size=(200, trials))
    boot = np.empty(200)
    for b in range(200):
        m = counts[idx[b]].mean(axis=0)
        m = np.maximum(m, 1e-12)
        boot[b] = np.polyfit(logx, np.log(m), 1)[0]
    return slope, float(boot.std(ddof=1))


def variation_index(spec, eps_grid, trials, seed, workers=None):
    """Estimated variation exponent: the regression slope clamped below by 1.

    Paths with finite total tree length (smooth paths sampled above their
    resolution scale) give a flat count curve with raw slope near 0; their
    variation index is 1 by convention, which the clamp reproduces.
    """
    slope, stderr = variation_slope(spec, eps_grid, trials, seed, workers)
    return max(slope, 1.0), stderr


def _pair_chunk(args):
    spec, eps, seed, start, stop = args
    out = np.empty((stop - start, 2))
    for i, trial in enumerate(range(start, stop)):
        values = sample(spec, seed, trial).values
        out[i, 0] = _kernels.drawdown_count(values, eps)
        out[i, 1] = 1.0 if values.max() - values.min() >= eps else 0.0
    return out


def tail_ratio_bounds(p: float):
    """Envelope [1, 1 + p/(1-p^2)] for E[N^eps] / P(R >= eps) at large eps."""
    return 1.0, 1.0 + p / (1.0 - p * p)


def tail_ratio(spec, eps, trials, seed, workers=None, min_hits=100) -> MCResult:
    """Ratio of the mean bar count to the empirical range tail at level eps.

    Standard error by the delta method from the per-trial covariance of
    (N^eps, indicator).  Requires at least min_hits range exceedances.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    workers = resolve_workers(workers)
    tasks = [(spec, float(eps), seed, a, b) for a, b in chunk_ranges(trials)]
    mat = np.concatenate(pool_map(_pair_chunk, tasks, workers), axis=0)
    hits = int(mat[:, 1].sum())
    if hits < min_hits:
        raise InsufficientDataError(
            f"only {hits} of {trials} trials exceeded eps={eps}; need >= {min_hits}"
        )
    n_mean = float(mat[:, 0].mean())
    p_hat = float(mat[:, 1].mean())
    ratio = n_mean / p_hat
    cov = np.cov(mat.T, ddof=1)
    grad = np.array([1.0 / p_hat, -n_mean / p_hat**2])
    var = float(grad @ cov @ grad) / trials
    stderr = math.sqrt(max(var, 0.0))
    return MCResult(
        statistic=f"tail_ratio(eps={eps:g})",
        mean=ratio,
        stderr=stderr,
        trials=trials,
        ci95=(ratio - 1.96 * stderr, ratio + 1.96 * stderr),
        seed=seed,
        spec_fingerprint=spec.fingerprint(),
    )


@dataclass(frozen=True)
class MomentBoundRow:
    k: int
    hits: int
    survival: float
    bound: float
    stderr: float
    passed: bool


@dataclass(frozen=True)
class MomentBoundReport:
    p_hat: float
    rows: tuple
    tightness_k2: Optional[float]
    trials: int
    passed: bool


def moment_bound_check(spec, eps, trials, seed, workers=None, min_hits=30) -> MomentBoundReport:
    """Check the geometric survival bound P(N^eps >= k) <= p^(2k-2).

    p is estimated as the empirical range tail P(N >= 1).  For every k >= 2
    with at least min_hits exceedances the empirical survival must stay
    below p_hat^(2k-2) plus three binomial standard errors.
    """
    workers = resolve_workers(workers)
    tasks = [(spec, float(eps), seed, a, b) for a, b in chunk_ranges(trials)]
    mat = np.concatenate(pool_map(_pair_chunk, tasks, workers), axis=0)
    counts = mat[:, 0].astype(np.int64)
    p_hat = float((counts >= 1).mean())
    if p_hat >= 1.0:
        raise DomainError("range tail estimate is 1; increase eps")
    rows = []
    tightness = None
    k = 2
    while True:
        hits = int(np.count_nonzero(counts >= k))
        if hits < min_hits:
            break
        surv = hits / trials
        se = math.sqrt(surv * (1.0 - surv) / trials)
        bound = p_hat ** (2 * k - 2) + 3.0 * se
        rows.append(MomentBoundRow(k, hits, surv, bound, se, surv <= bound))
        if k == 2:
            tightness = surv / p_hat**2
        k += 1
    passed = all(r.passed for r in rows)
    return MomentBoundReport(
        p_hat=p_hat, rows=tuple(rows), tightness_k2=tightness, trials=trials, passed=passed
    )
