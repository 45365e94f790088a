"""Shared oracles and hypothesis strategies.

The brute-force barcode oracle sweeps levels through the sorted distinct
values and tracks superlevel components as runs of grid indices; it shares
no code with the union-find implementation under test.
"""

import numpy as np
import pytest
from hypothesis import strategies as st

from pathbars.paths import SampledPath


def _runs_at_level(values, level, weak=True):
    """Maximal runs of indices with value >= level (components of {f >= level})."""
    mask = values >= level if weak else values > level
    runs = []
    start = None
    for i, m in enumerate(mask):
        if m and start is None:
            start = i
        elif not m and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def oracle_superlevel_bars(values):
    """(birth, death) bars of the superlevel filtration, essential capped.

    Sweeps the sorted distinct values downward; a run that intersects no
    previous run is a birth, a run swallowing several previous components
    is a merge where all but the elder die (ties to the leftmost birth).
    """
    values = np.asarray(values, dtype=float)
    levels = np.unique(values)[::-1]
    bars = []
    # live components: list of dicts with keys lo, hi, birth, birth_pos
    live = []
    for level in levels:
        runs = _runs_at_level(values, level)
        new_live = []
        for lo, hi in runs:
            inside = [c for c in live if lo <= c["lo"] and c["hi"] <= hi]
            if not inside:
                new_live.append({"lo": lo, "hi": hi, "birth": level, "birth_pos": lo})
            else:
                elder = max(inside, key=lambda c: (c["birth"], -c["birth_pos"]))
                for c in inside:
                    if c is not elder:
                        bars.append((c["birth"], level))
                new_live.append(
                    {"lo": lo, "hi": hi, "birth": elder["birth"], "birth_pos": elder["birth_pos"]}
                )
        live = new_live
    assert len(live) == 1
    bars.append((live[0]["birth"], float(values.min())))
    return sorted(bars)


def oracle_count_eps(values, eps):
    return sum(1 for b, d in oracle_superlevel_bars(values) if b - d >= eps)


def oracle_count_rect(values, x, eps):
    """Capped bars containing [x, x+eps], via the level-sweep bars."""
    return sum(1 for b, d in oracle_superlevel_bars(values) if d <= x and b >= x + eps)


def oracle_sublevel_bars(values):
    """Capped (birth, death) pairs of the sublevel filtration (birth <= death)."""
    sup_bars = oracle_superlevel_bars(-np.asarray(values, dtype=float))
    return sorted((-b, -d) for b, d in sup_bars)


# ---------------------------------------------------------------- strategies

finite_floats = st.floats(
    min_value=-100, max_value=100, allow_nan=False, allow_infinity=False
)


@st.composite
def float_paths(draw, min_size=2, max_size=24):
    """Generic PL paths on [0, 1] with continuous values."""
    vals = draw(st.lists(finite_floats, min_size=min_size, max_size=max_size))
    times = np.linspace(0.0, 1.0, len(vals))
    return SampledPath(times, np.asarray(vals))


@st.composite
def lattice_paths(draw, min_size=2, max_size=24):
    """Integer-valued paths: adversarially tie-heavy (plateaus, equal maxima)."""
    vals = draw(
        st.lists(st.integers(min_value=-5, max_value=5), min_size=min_size, max_size=max_size)
    )
    times = np.linspace(0.0, 1.0, len(vals))
    return SampledPath(times, np.asarray(vals, dtype=float))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)


def range_tail_mc_oracle(eps_list, n_paths, n_steps, master, chunk=20_000):
    """Monte Carlo of P(range of BM on [0,1] >= eps), free of grid bias.

    The per-step extremes of the Brownian bridge between consecutive grid
    values are sampled exactly by inverting the bridge maximum law, so the
    path supremum and infimum are exact; only the (astronomically unlikely)
    event that both extremes land in one step is approximated.
    """
    import math

    rng = np.random.Generator(
        np.random.Philox(key=np.array([master, 2**62 + 1], dtype=np.uint64))
    )
    dt = 1.0 / n_steps
    hits = np.zeros(len(eps_list), dtype=np.int64)
    done = 0
    while done < n_paths:
        m = min(chunk, n_paths - done)
        inc = rng.standard_normal((m, n_steps)) * math.sqrt(dt)
        paths = np.cumsum(inc, axis=1)
        a = np.concatenate([np.zeros((m, 1)), paths[:, :-1]], axis=1)
        b = paths
        u1 = rng.random((m, n_steps))
        u2 = rng.random((m, n_steps))
        mx = 0.5 * (a + b + np.sqrt((a - b) ** 2 - 2 * dt * np.log(u1)))
        mn = 0.5 * (a + b - np.sqrt((a - b) ** 2 - 2 * dt * np.log(u2)))
        path_range = mx.max(axis=1) - mn.min(axis=1)
        for j, eps in enumerate(eps_list):
            hits[j] += int((path_range >= eps).sum())
        done += m
    return hits / n_paths
