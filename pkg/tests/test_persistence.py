import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    float_paths,
    lattice_paths,
    oracle_count_eps,
    oracle_count_rect,
    oracle_sublevel_bars,
    oracle_superlevel_bars,
)
from pathbars.errors import DomainError
from pathbars.paths import SampledPath, negate, reparametrize, sup_distance
from pathbars.persistence import (
    band_record,
    barcode,
    count_eps,
    count_eps_crossings,
    count_rect,
    count_rect_from_barcode,
    crossings,
    diagram,
    drawdown_record,
    rect_count_integral,
    trimmed_length,
)

EXAMPLE = SampledPath([0, 1, 2, 3, 4], [0, 2, 1, 3, 0])


# ------------------------------------------------------------------ barcode

def test_barcode_hand_examples():
    bc = barcode(EXAMPLE)
    assert sorted(zip(bc.births, bc.deaths)) == [(2.0, 1.0), (3.0, 0.0)]
    assert barcode(SampledPath([0, 1], [0, 1])).bars[0].length == 1.0
    const = barcode(SampledPath([0, 1], [3, 3]))
    assert const.n_bars == 1 and const.bars[0].length == 0.0


def test_barcode_sorted_by_decreasing_length():
    bc = barcode(EXAMPLE)
    lengths = bc.lengths
    assert np.all(np.diff(lengths) <= 0)
    assert bc.range == lengths[0] == 3.0


def test_barcode_plateau_collapse():
    # plateaus at a maximum and at the ends
    f = SampledPath(np.arange(8.0), [1, 1, 3, 3, 2, 4, 4, 0])
    bc = barcode(f)
    assert sorted(zip(bc.births, bc.deaths)) == [(3.0, 2.0), (4.0, 0.0)]


def test_barcode_equal_maxima_tiebreak():
    # two maxima at the same height: the earlier one survives the merge
    f = SampledPath(np.arange(5.0), [0, 2, 1, 2, 0])
    bc = barcode(f)
    assert sorted(zip(bc.births, bc.deaths)) == [(2.0, 0.0), (2.0, 1.0)]


@settings(max_examples=150, deadline=None)
@given(float_paths())
def test_barcode_matches_level_sweep_oracle(f):
    bc = barcode(f)
    got = sorted(zip(bc.births.tolist(), bc.deaths.tolist()))
    assert got == pytest.approx(oracle_superlevel_bars(f.values))


@settings(max_examples=150, deadline=None)
@given(lattice_paths())
def test_barcode_matches_oracle_on_lattice(f):
    bc = barcode(f)
    got = sorted(zip(bc.births.tolist(), bc.deaths.tolist()))
    exp = oracle_superlevel_bars(f.values)
    assert got == exp


@settings(max_examples=60, deadline=None)
@given(lattice_paths())
def test_bar_count_equals_local_max_count(f):
    dv = np.diff(f.values)
    v = f.values[np.concatenate(([True], dv != 0))]
    if v.shape[0] == 1:
        n_max = 1
    else:
        d = np.sign(np.diff(v))
        n_max = int(np.sum((d[1:] < 0) & (d[:-1] > 0)))
        n_max += int(d[0] < 0) + int(d[-1] > 0)
    assert barcode(f).n_bars == max(n_max, 1)


def test_reparametrization_invariance():
    f = SampledPath([0, 1, 2], [0, 2, 1])
    g = reparametrize(f, [0, 10, 20])
    bf, bg = barcode(f), barcode(g)
    assert np.array_equal(bf.births, bg.births)
    assert np.array_equal(bf.deaths, bg.deaths)


# ------------------------------------------------------------------- counts

def test_count_eps_examples():
    bc = barcode(EXAMPLE)
    assert count_eps(bc, 0.5) == 2
    assert count_eps(bc, 1.5) == 1
    assert count_eps(bc, 3.5) == 0
    assert count_eps(bc, 3.0) == 1  # inclusive threshold
    with pytest.raises(DomainError):
        count_eps(bc, 0.0)


def test_count_eps_crossings_examples():
    assert count_eps_crossings(EXAMPLE, 0.5) == 2
    assert count_eps_crossings(SampledPath([0, 1], [0, 1]), 0.7) == 1
    teeth = SampledPath(np.arange(11.0), [0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0])
    assert count_eps_crossings(teeth, 0.9) == 5
    with pytest.raises(DomainError):
        count_eps_crossings(EXAMPLE, -1.0)


@settings(max_examples=200, deadline=None)
@given(lattice_paths(), st.integers(min_value=1, max_value=9))
def test_cross_algorithm_agreement_lattice(f, k):
    # tie-heavy: eps often exactly equals a bar length
    eps = 0.5 * k
    assert count_eps(barcode(f), eps) == count_eps_crossings(f, eps)


@settings(max_examples=150, deadline=None)
@given(float_paths(), st.floats(min_value=0.01, max_value=10.0))
def test_cross_algorithm_agreement_float(f, eps):
    assert count_eps(barcode(f), eps) == count_eps_crossings(f, eps)


@settings(max_examples=100, deadline=None)
@given(lattice_paths())
def test_neps_monotone_and_range_bounds(f):
    bc = barcode(f)
    rng = bc.range
    grid = np.linspace(1e-6, max(rng, 1e-5) * 1.5, 17)
    counts = [count_eps(bc, e) for e in grid]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    for e, c in zip(grid, counts):
        if e > rng:
            assert c == 0
        else:
            assert c >= 1
    if rng > 0:
        assert count_eps(bc, rng) >= 1  # inclusive at the full range


def test_drawdown_record_exact_times():
    rec = drawdown_record(EXAMPLE, 0.5)
    assert rec.kind == "drawdown"
    # descending from max 2 at t=1 with slope -1 hits drawdown 0.5 at 1.5;
    # rise of 0.5 from min 1 at t=2 (slope +2) completes at 2.25;
    # drawdown 0.5 from max 3 at t=3 (slope -3) completes at 3 + 1/6
    assert rec.drawdown_stops.tolist() == pytest.approx([1.5, 3 + 1 / 6])
    assert rec.drawup_stops.tolist() == pytest.approx([2.25])
    assert np.all(np.diff(rec.times) > 0)

    tent = SampledPath([0, 1, 2], [0, 2, 0])
    assert drawdown_record(tent, 1.0).drawdown_stops.tolist() == [1.5]
    mono = SampledPath([0, 1], [0, 5])
    assert drawdown_record(mono, 1.0).times.size == 0


@settings(max_examples=100, deadline=None)
@given(lattice_paths(), st.integers(min_value=1, max_value=6))
def test_drawdown_times_consistent_with_count(f, k):
    eps = 0.5 * k
    rec = drawdown_record(f, eps)
    n = count_eps_crossings(f, eps)
    expected = 1 + rec.drawup_stops.size if f.range >= eps else 0
    assert n == expected


# ---------------------------------------------------------------- crossings

def test_crossings_hand_examples():
    assert crossings(EXAMPLE, 1.2, 0.5) == (2, 2)
    tent = SampledPath([0, 1, 2], [0, 1, 0])
    assert crossings(tent, 0.2, 0.5) == (1, 1)
    below = SampledPath([0, 1], [-3, -2])
    assert crossings(below, 0.0, 1.0) == (0, 0)
    with pytest.raises(DomainError):
        crossings(tent, 0.2, 0.0)


@settings(max_examples=200, deadline=None)
@given(
    lattice_paths(),
    st.floats(min_value=-5.5, max_value=5.5),
    st.floats(min_value=0.1, max_value=5.0),
)
def test_crossings_invariants_and_rect_oracle(f, x, eps):
    u, d = crossings(f, x, eps)
    assert abs(u - d) <= 1
    n = count_rect(f, x, eps)
    # max(U, D) plus possibly the window-straddling component
    assert n in (max(u, d), max(u, d) + 1)
    assert n == oracle_count_rect(f.values, x, eps)
    assert n == count_rect_from_barcode(barcode(f), x, eps)
    if f.values[0] == f.values.min() and x >= f.values[0]:
        assert n == u


def test_band_record_times():
    rec = band_record(EXAMPLE, 1.2, 0.5)
    assert rec.upcrossings == 2 and rec.downcrossings == 2
    # up completions at f=1.7 on rising segments; down at f=1.2 on falls
    assert rec.times.tolist() == pytest.approx([0.85, 1.8, 2.35, 3.6])


@settings(max_examples=150, deadline=None)
@given(
    lattice_paths(),
    st.floats(min_value=-5.5, max_value=5.5),
    st.floats(min_value=0.1, max_value=4.0),
)
def test_band_record_counts_match_crossings(f, x, eps):
    rec = band_record(f, x, eps)
    u, d = crossings(f, x, eps)
    assert (rec.upcrossings, rec.downcrossings) == (u, d)
    assert np.all(np.diff(rec.times) > 0)


def test_count_rect_examples():
    assert count_rect(EXAMPLE, 1.2, 0.5) == 2
    assert count_rect(EXAMPLE, 3.5, 0.5) == 0  # x above sup
    tent = SampledPath([0, 1, 2], [0, 1, 0])
    assert count_rect(tent, 0.2, 0.5) == 1


# ----------------------------------------------------------- trimmed length

def test_trimmed_length_examples():
    bc = barcode(EXAMPLE)
    assert trimmed_length(bc, 0.0) == 4.0
    assert trimmed_length(bc, 1.0) == 2.0
    assert trimmed_length(bc, 5.0) == 0.0
    with pytest.raises(DomainError):
        trimmed_length(bc, -0.5)


@settings(max_examples=120, deadline=None)
@given(float_paths(), st.floats(min_value=0.01, max_value=5.0))
def test_trimmed_equals_rect_integral(f, eps):
    lhs = trimmed_length(barcode(f), eps)
    rhs = rect_count_integral(f, eps)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(lattice_paths(), st.integers(min_value=1, max_value=6))
def test_trimmed_equals_rect_integral_lattice(f, k):
    eps = 0.3 * k
    lhs = trimmed_length(barcode(f), eps)
    rhs = rect_count_integral(f, eps)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


# ------------------------------------------------------------------ diagram

def test_diagram_conventions():
    bc = barcode(SampledPath([0, 1], [0, 1]))
    assert diagram(bc, "superlevel").tolist() == [[1.0, 0.0]]
    assert diagram(bc, "sublevel").tolist() == [[0.0, -1.0]]
    with pytest.raises(DomainError):
        diagram(bc, "sideways")
    empty_points = diagram(barcode(SampledPath([0, 1], [2, 2])), "superlevel")
    assert empty_points.shape == (1, 2)  # constant path: one zero bar, never empty


@settings(max_examples=100, deadline=None)
@given(lattice_paths())
def test_negation_reflection_against_sublevel_oracle(f):
    # superlevel bars (b, d) of -f are the capped sublevel pairs of f under
    # negation of both coordinates (the filtrations are identical)
    neg = barcode(negate(f))
    got = sorted((-b, -d) for b, d in zip(neg.births, neg.deaths))
    exp = [(float(b), float(d)) for b, d in oracle_sublevel_bars(f.values)]
    assert [(float(b), float(d)) for b, d in got] == exp


# ---------------------------------------------------------------- stability

@settings(max_examples=120, deadline=None)
@given(float_paths(min_size=4, max_size=20), float_paths(min_size=4, max_size=20), st.floats(min_value=0.05, max_value=2.0))
def test_deterministic_stability_sandwich(f, g, s):
    delta = sup_distance(f, g)
    eps = 2.0 * delta + s
    n_g = count_eps_crossings(g, eps)
    lo = count_eps_crossings(f, eps + 2 * delta)
    hi = count_eps_crossings(f, eps - 2 * delta) if eps > 2 * delta else None
    assert n_g >= lo
    if hi is not None:
        assert n_g <= hi


@settings(max_examples=80, deadline=None)
@given(lattice_paths())
def test_oracle_count_eps_agreement(f):
    for eps in (0.5, 1.0, 2.5):
        assert count_eps(barcode(f), eps) == oracle_count_eps(f.values, eps)
