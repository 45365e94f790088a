"""Numba kernels for the exact path scans.

All scans work on the piecewise-linear interpolant.  Segments are monotone,
so every level-crossing event happens either at a grid point or at a unique
interior point of a segment, and checking grid values in order sees every
event exactly once; interior event times are solved linearly on the segment.

Thresholds are inclusive (``>= eps``) so that the scan counts agree exactly
with the inclusive bar-length convention on tie-heavy lattice paths (random
walks); for continuous distributions the distinction is a null event.
"""

import numpy as np
from numba import njit

__all__ = [
    "drawdown_count",
    "drawdown_times",
    "band_touches",
    "band_crossings",
    "rect_count",
    "band_crossing_times",
    "band_count_multi",
    "merge_bars",
]


@njit(cache=True)
def drawdown_count(values, eps):
    """Number of bars of length >= eps via the alternating drawdown scan.

    Returns 0 if the path range is below eps, else 1 plus the number of
    completed drawup stopping times.
    """
    n = values.shape[0]
    vmax = values[0]
    vmin = values[0]
    for i in range(1, n):
        v = values[i]
        if v > vmax:
            vmax = v
        if v < vmin:
            vmin = v
    if vmax - vmin < eps:
        return 0
    count = 1
    down = True  # tracking drawdown from running max; else drawup from running min
    ref = values[0]
    for i in range(1, n):
        v = values[i]
        while True:
            if down:
                if v > ref:
                    ref = v
                    break
                elif ref - v >= eps:
                    down = False
                    ref = ref - eps  # path level at the switch time
                    continue
                else:
                    break
            else:
                if v < ref:
                    ref = v
                    break
                elif v - ref >= eps:
                    count += 1
                    down = True
                    ref = ref + eps
                    continue
                else:
                    break
    return count


@njit(cache=True)
def drawdown_times(times, values, eps):
    """Realized alternating drawdown/drawup stopping times, solved exactly.

    Returns (t_times, s_times): completion times of the drawdown stops and
    the drawup stops.  Triggers happen only on segments moving toward the
    threshold, so each linear solve is well posed.
    """
    n = values.shape[0]
    t_out = np.empty(n)
    s_out = np.empty(n)
    nt = 0
    ns = 0
    down = True
    ref = values[0]
    for i in range(1, n):
        a = values[i - 1]
        b = values[i]
        t0 = times[i - 1]
        t1 = times[i]
        v = b
        while True:
            if down:
                if v > ref:
                    ref = v
                    break
                elif ref - v >= eps:
                    c = ref - eps
                    t_out[nt] = t0 + (t1 - t0) * ((c - a) / (b - a))
                    nt += 1
                    down = False
                    ref = c
                    continue
                else:
                    break
            else:
                if v < ref:
                    ref = v
                    break
                elif v - ref >= eps:
                    c = ref + eps
                    s_out[ns] = t0 + (t1 - t0) * ((c - a) / (b - a))
                    ns += 1
                    down = True
                    ref = c
                    continue
                else:
                    break
    return t_out[:nt], s_out[:ns]


@njit(cache=True)
def band_touches(values, x, eps):
    """Crossing machinery of the band [x, x+eps] in one pass.

    Returns (U, D, first, last, any_lo): completed up/downcrossing counts,
    the first and last barrier touched (0 none, 1 lower barrier, 2 upper),
    and whether the lower barrier was touched at all.
    """
    lo = x
    hi = x + eps
    n = values.shape[0]
    u = 0
    d = 0
    first = 0
    last = 0
    any_lo = False
    useek_hi = False  # upcrossing machine: touch lo first, then hi
    dseek_lo = False  # downcrossing machine: touch hi first, then lo
    for i in range(n):
        v = values[i]
        if v <= lo:
            if first == 0:
                first = 1
            last = 1
            any_lo = True
        elif v >= hi:
            if first == 0:
                first = 2
            last = 2
        if useek_hi:
            if v >= hi:
                u += 1
                useek_hi = False
        if not useek_hi:
            if v <= lo:
                useek_hi = True
        if dseek_lo:
            if v <= lo:
                d += 1
                dseek_lo = False
        if not dseek_lo:
            if v >= hi:
                dseek_lo = True
    return u, d, first, last, any_lo


@njit(cache=True)
def band_crossings(values, x, eps):
    """Completed up- and downcrossing counts of the band [x, x+eps]."""
    u, d, _, _, _ = band_touches(values, x, eps)
    return u, d


@njit(cache=True)
def rect_count(values, x, eps):
    """Number of capped bars containing [x, x+eps].

    max(U, D), plus one when the path opens and closes the window at the
    upper barrier but still visits the lower one in between: that component
    spans the window without completing either crossing.  Without any
    lower-barrier visit nothing counts (every capped death sits above x).
    """
    u, d, first, last, any_lo = band_touches(values, x, eps)
    n = u if u > d else d
    if first == 2 and last == 2 and any_lo:
        n += 1
    return n


@njit(cache=True)
def band_crossing_times(times, values, x, eps):
    """Exact completion times of up- and downcrossings of [x, x+eps]."""
    lo = x
    hi = x + eps
    n = values.shape[0]
    u_out = np.empty(n)
    d_out = np.empty(n)
    nu = 0
    nd = 0
    useek_hi = values[0] <= lo
    dseek_lo = values[0] >= hi

    for i in range(1, n):
        a = values[i - 1]
        b = values[i]
        t0 = times[i - 1]
        t1 = times[i]
        # a monotone segment can host at most one lo-event and one hi-event,
        # ordered by the direction of motion
        if b >= a:
            # rising: while the up-machine is armed the path sits below hi,
            # so its completion is the unique hi-crossing of this segment
            if not useek_hi and b <= lo:
                useek_hi = True
            if useek_hi and a < hi and hi <= b:
                u_out[nu] = t0 + (t1 - t0) * ((hi - a) / (b - a))
                nu += 1
                useek_hi = False
            if not dseek_lo and b >= hi:
                dseek_lo = True
        else:
            # falling: symmetric for the down-machine at the lo-crossing
            if not dseek_lo and b >= hi:
                dseek_lo = True
            if dseek_lo and a > lo and lo >= b:
                d_out[nd] = t0 + (t1 - t0) * ((lo - a) / (b - a))
                nd += 1
                dseek_lo = False
            if not useek_hi and b <= lo:
                useek_hi = True
    return u_out[:nu], d_out[:nd]


@njit(cache=True)
def band_count_multi(values, xs, eps):
    """Rank count of the band [x, x+eps] for every x in xs."""
    out = np.empty(xs.shape[0], dtype=np.int64)
    for j in range(xs.shape[0]):
        out[j] = rect_count(values, xs[j], eps)
    return out


@njit(cache=True)
def merge_bars(max_vals, valley_vals, order, inf_val):
    """Pair maxima with merge saddles by the elder rule (union-find sweep).

    max_vals: strict local maxima in time order; valley_vals[j] is the
    interior minimum between maxima j and j+1; order lists valley indices by
    decreasing value (ties by index).  The surviving component keeps the
    higher birth; on equal births the earlier maximum survives.  Returns
    (births, deaths) with the capped essential bar last.
    """
    k = max_vals.shape[0]
    births = np.empty(k)
    deaths = np.empty(k)
    parent = np.arange(k)
    comp_birth = max_vals.copy()
    comp_idx = np.arange(k)
    nb = 0
    for oi in range(order.shape[0]):
        j = order[oi]
        a = j
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = j + 1
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if comp_birth[a] > comp_birth[b] or (
            comp_birth[a] == comp_birth[b] and comp_idx[a] < comp_idx[b]
        ):
            surv, dead = a, b
        else:
            surv, dead = b, a
        births[nb] = comp_birth[dead]
        deaths[nb] = valley_vals[j]
        nb += 1
        parent[dead] = surv
    # last surviving component: the global maximum, capped at inf f
    root = 0
    while parent[root] != root:
        root = parent[root]
    births[nb] = comp_birth[root]
    deaths[nb] = inf_val
    return births, deaths


def warmup():
    """Trigger JIT compilation of all kernels (call before forking workers)."""
    v = np.array([0.0, 1.0, 0.5, 2.0, 0.0])
    t = np.arange(5.0)
    drawdown_count(v, 0.4)
    drawdown_times(t, v, 0.4)
    band_crossings(v, 0.2, 0.5)
    rect_count(v, 0.2, 0.5)
    band_crossing_times(t, v, 0.2, 0.5)
    band_count_multi(v, np.array([0.1, 0.7]), 0.5)
    merge_bars(
        np.array([1.0, 2.0]),
        np.array([0.5]),
        np.array([0], dtype=np.int64),
        0.0,
    )
