"""Exact degree-0 persistence of piecewise-linear paths.

The barcode is taken for the superlevel filtration {f >= x} with the
essential component capped at inf f, so every bar is a finite interval
[death, birth] with birth >= death.  Two independent algorithms are
provided for the count of bars of length >= eps: the barcode itself
(extrema + union-find sweep) and the alternating drawdown scan; they agree
exactly on every input.

Plateaus are collapsed before extrema extraction and equal-height merge
ties are broken toward the earliest maximum, so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import DomainError
from .paths import SampledPath

__all__ = [
    "Bar",
    "Barcode",
    "CrossingRecord",
    "barcode",
    "count_eps",
    "count_eps_crossings",
    "count_eps_many",
    "drawdown_record",
    "crossings",
    "band_record",
    "count_rect",
    "count_rect_from_barcode",
    "trimmed_length",
    "rect_count_integral",
    "diagram",
    "write_barcode_csv",
    "write_diagram_csv",
]


@dataclass(frozen=True)
class Bar:
    """One bar of the superlevel barcode: [death, birth], birth >= death."""

    birth: float
    death: float

    @property
    def length(self) -> float:
        return self.birth - self.death


@dataclass(frozen=True)
class Barcode:
    """Multiset of bars sorted by decreasing length, plus the path extremes."""

    births: np.ndarray
    deaths: np.ndarray
    inf_value: float
    sup_value: float

    @property
    def lengths(self) -> np.ndarray:
        return self.births - self.deaths

    @property
    def n_bars(self) -> int:
        """Total bar count = number of strict local maxima (this is N^0)."""
        return int(self.births.shape[0])

    @property
    def range(self) -> float:
        return self.sup_value - self.inf_value

    @property
    def bars(self) -> tuple:
        return tuple(Bar(float(b), float(d)) for b, d in zip(self.births, self.deaths))


@dataclass(frozen=True)
class CrossingRecord:
    """Realized stopping times of a crossing scan.

    kind "drawdown": times interleave the drawdown/drawup completions
    T_1, S_1, T_2, ...  kind "band": times merge the upcrossing and
    downcrossing completion times of [x, x+eps] and the counts are stored.
    """

    kind: str
    eps: float
    times: np.ndarray
    x: Optional[float] = None
    upcrossings: Optional[int] = None
    downcrossings: Optional[int] = None

    @property
    def drawdown_stops(self) -> np.ndarray:
        if self.kind != "drawdown":
            raise DomainError("drawdown_stops only defined for drawdown records")
        return self.times[0::2]

    @property
    def drawup_stops(self) -> np.ndarray:
        if self.kind != "drawdown":
            raise DomainError("drawup_stops only defined for drawdown records")
        return self.times[1::2]


def _collapsed_extrema(values: np.ndarray):
    """Alternating strict extrema of the plateau-collapsed value sequence.

    Returns (max_vals, valley_vals): maxima in time order (endpoints count
    when the path decreases away from them) and the interior minimum between
    each consecutive pair of maxima.  None for a constant path.
    """
    dv = np.diff(values)
    keep = np.concatenate(([True], dv != 0))
    v = values[keep]
    if v.shape[0] == 1:
        return None
    d = np.sign(np.diff(v))
    interior = np.nonzero(d[1:] != d[:-1])[0] + 1
    idx = np.concatenate(([0], interior, [v.shape[0] - 1]))
    ev = v[idx]
    start = 0 if d[0] < 0 else 1  # position of the first maximum
    maxima = ev[start::2]
    valleys = ev[start + 1 :: 2][: maxima.shape[0] - 1]
    return maxima, valleys


def _bars_arrays(values: np.ndarray):
    """(births, deaths) of the superlevel barcode, unsorted."""
    ext = _collapsed_extrema(values)
    if ext is None:
        v = float(values[0])
        return np.array([v]), np.array([v])
    maxima, valleys = ext
    if valleys.shape[0] == 0:
        return np.array([maxima[0]]), np.array([float(values.min())])
    order = np.lexsort((np.arange(valleys.shape[0]), -valleys))
    return _kernels.merge_bars(maxima, valleys, order, float(values.min()))


def barcode(f: SampledPath) -> Barcode:
    """Superlevel barcode of the PL interpolant, essential bar capped at inf f."""
    births, deaths = _bars_arrays(f.values)
    lengths = births - deaths
    # sort by decreasing length; ties by birth then death for determinism
    order = np.lexsort((deaths, -births, -lengths))
    return Barcode(
        births=births[order],
        deaths=deaths[order],
        inf_value=float(f.values.min()),
        sup_value=float(f.values.max()),
    )


def _check_eps(eps) -> float:
    eps = float(eps)
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    return eps


def count_eps(bc: Barcode, eps) -> int:
    """Number of bars of length >= eps (inclusive threshold)."""
    eps = _check_eps(eps)
    return int(np.count_nonzero(bc.lengths >= eps))


def count_eps_crossings(f: SampledPath, eps) -> int:
    """N^eps via the independent drawdown stopping-time scan."""
    eps = _check_eps(eps)
    return int(_kernels.drawdown_count(f.values, eps))


def count_eps_many(lengths_sorted: np.ndarray, eps_grid: np.ndarray) -> np.ndarray:
    """Counts of bars >= eps for each eps, given ascending sorted lengths."""
    n = lengths_sorted.shape[0]
    return n - np.searchsorted(lengths_sorted, eps_grid, side="left")


def drawdown_record(f: SampledPath, eps) -> CrossingRecord:
    """The realized alternating drawdown/drawup stopping times of f."""
    eps = _check_eps(eps)
    t_times, s_times = _kernels.drawdown_times(f.times, f.values, eps)
    merged = np.empty(t_times.shape[0] + s_times.shape[0])
    merged[0::2] = t_times
    merged[1::2] = s_times
    return CrossingRecord(kind="drawdown", eps=eps, times=merged)


def crossings(f: SampledPath, x, eps):
    """Completed (upcrossings, downcrossings) of the band [x, x+eps]."""
    eps = _check_eps(eps)
    u, d = _kernels.band_crossings(f.values, float(x), eps)
    return int(u), int(d)


def band_record(f: SampledPath, x, eps) -> CrossingRecord:
    """Crossing record of the band [x, x+eps] with exact completion times."""
    eps = _check_eps(eps)
    u_times, d_times = _kernels.band_crossing_times(f.times, f.values, float(x), eps)
    merged = np.sort(np.concatenate([u_times, d_times]))
    return CrossingRecord(
        kind="band",
        eps=eps,
        x=float(x),
        times=merged,
        upcrossings=int(u_times.shape[0]),
        downcrossings=int(d_times.shape[0]),
    )


def count_rect(f: SampledPath, x, eps) -> int:
    """Number of bars containing [x, x+eps], from the crossing scan.

    This is max(U, D), plus one in the boundary case where the path both
    enters and leaves the observation window above x+eps without the
    bracketing crossings (that component is alive across the whole window
    and completes neither an up- nor a downcrossing); for paths started at
    their infimum below x the correction never fires and the count is U.
    """
    eps = _check_eps(eps)
    return int(_kernels.rect_count(f.values, float(x), eps))


def count_rect_from_barcode(bc: Barcode, x, eps) -> int:
    """The same count via the barcode: bars with death <= x and birth >= x+eps."""
    eps = _check_eps(eps)
    x = float(x)
    return int(np.count_nonzero((bc.deaths <= x) & (bc.births >= x + eps)))


def trimmed_length(bc: Barcode, eps) -> float:
    """Total bar length remaining after trimming eps off every bar."""
    eps = float(eps)
    if eps < 0:
        raise DomainError(f"eps must be nonnegative, got {eps}")
    return float(np.maximum(bc.lengths - eps, 0.0).sum())


def rect_count_integral(f: SampledPath, eps) -> float:
    """Exact integral over x of the band count x -> count_rect(f, x, eps).

    The count is piecewise constant in x with breakpoints among the sampled
    values and the sampled values shifted down by eps, so summing midpoint
    counts times interval widths is exact.  Counts come from the crossing
    scan, independent of the barcode.
    """
    eps = _check_eps(eps)
    vals = np.unique(f.values)
    breaks = np.unique(np.concatenate([vals, vals - eps]))
    if breaks.shape[0] < 2:
        return 0.0
    mids = 0.5 * (breaks[1:] + breaks[:-1])
    counts = _kernels.band_count_multi(f.values, mids, eps)
    return float(np.dot(counts, np.diff(breaks)))


def diagram(bc: Barcode, convention: str) -> np.ndarray:
    """Diagram points: superlevel (birth, death); sublevel applies (b,d)->(-d,-b)."""
    if convention == "superlevel":
        return np.column_stack([bc.births, bc.deaths])
    if convention == "sublevel":
        return np.column_stack([-bc.deaths, -bc.births])
    raise DomainError(f"unknown convention {convention!r}")


def write_barcode_csv(bc: Barcode, fileobj) -> None:
    fileobj.write("birth,death,length\n")
    for b, d in zip(bc.births, bc.deaths):
        fileobj.write(f"{b:.17g},{d:.17g},{b - d:.17g}\n")


def write_diagram_csv(bc: Barcode, convention: str, fileobj) -> None:
    pts = diagram(bc, convention)
    fileobj.write("b,d,convention\n")
    for b, d in pts:
        fileobj.write(f"{b:.17g},{d:.17g},{convention}\n")
