"""Sampled piecewise-linear paths on an interval.

A path is a strictly increasing time grid together with real values; between
samples the path is the linear interpolant.  Everything downstream (bar
counts, crossing counts, trimmed length) is computed exactly for this
interpolant, so the combinatorial identities hold exactly rather than up to
discretisation error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "SampledPath",
    "evaluate",
    "sup_distance",
    "negate",
    "reparametrize",
    "coarsen",
    "write_path_csv",
    "read_path_csv",
]


@dataclass(frozen=True)
class SampledPath:
    """A piecewise-linear path: strictly increasing times, finite values."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or values.ndim != 1:
            raise DomainError("times and values must be one-dimensional")
        if times.shape[0] != values.shape[0]:
            raise DomainError("times and values must have equal length")
        if times.shape[0] < 2:
            raise DomainError("a path needs at least two samples")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise DomainError("times and values must be finite")
        if not np.all(np.diff(times) > 0):
            raise DomainError("times must be strictly increasing")

    @property
    def n_samples(self) -> int:
        return self.times.shape[0]

    @property
    def t_min(self) -> float:
        return float(self.times[0])

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    @property
    def range(self) -> float:
        """sup f - inf f of the interpolant (attained at samples)."""
        return float(self.values.max() - self.values.min())


def evaluate(f: SampledPath, t) -> float:
    """Evaluate the linear interpolant at time t (exact at grid points)."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < f.times[0]) or np.any(t_arr > f.times[-1]):
        raise DomainError(
            f"t={t} outside path domain [{f.times[0]}, {f.times[-1]}]"
        )
    out = np.interp(t_arr, f.times, f.values)
    return float(out) if out.ndim == 0 else out


def sup_distance(f: SampledPath, g: SampledPath) -> float:
    """Exact L-infinity distance of two PL paths on the same interval.

    The difference of two PL functions is PL with breakpoints on the union
    grid, and |linear| attains its maximum at segment endpoints, so
    evaluating both paths on the union grid is exact.
    """
    if f.times[0] != g.times[0] or f.times[-1] != g.times[-1]:
        raise DomainError("paths must share the same time interval")
    grid = np.union1d(f.times, g.times)
    fv = np.interp(grid, f.times, f.values)
    gv = np.interp(grid, g.times, g.values)
    return float(np.abs(fv - gv).max())


def negate(f: SampledPath) -> SampledPath:
    """Flip the path upside down (swaps the filtration direction)."""
    return SampledPath(f.times, -f.values)


def reparametrize(f: SampledPath, new_times) -> SampledPath:
    """Replace the time grid, keeping values; new grid must be strictly increasing."""
    new_times = np.asarray(new_times, dtype=np.float64)
    if new_times.shape != f.times.shape:
        raise DomainError("new_times must have the same length as the path")
    return SampledPath(new_times, f.values)


def coarsen(f: SampledPath, stride: int) -> SampledPath:
    """Subsample every stride-th point, always keeping both endpoints."""
    if stride < 1 or int(stride) != stride:
        raise DomainError("stride must be a positive integer")
    stride = int(stride)
    idx = np.arange(0, f.n_samples, stride)
    if idx[-1] != f.n_samples - 1:
        idx = np.append(idx, f.n_samples - 1)
    return SampledPath(f.times[idx], f.values[idx])


def write_path_csv(f: SampledPath, fileobj) -> None:
    """Write `t,value` rows with 17 significant digits (lossless round trip)."""
    fileobj.write("t,value\n")
    for t, v in zip(f.times, f.values):
        fileobj.write(f"{t:.17g},{v:.17g}\n")


def read_path_csv(fileobj) -> SampledPath:
    """Read a path CSV; rejects non-monotone time columns."""
    header = fileobj.readline().strip()
    if header != "t,value":
        raise DomainError(f"expected header 't,value', got {header!r}")
    rows = [line.strip() for line in fileobj if line.strip()]
    times = np.empty(len(rows))
    values = np.empty(len(rows))
    for i, row in enumerate(rows):
        parts = row.split(",")
        if len(parts) != 2:
            raise DomainError(f"malformed row {i + 2}: {row!r}")
        times[i], values[i] = float(parts[0]), float(parts[1])
    return SampledPath(times, values)
