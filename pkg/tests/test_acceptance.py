"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Statistical criteria run at fixed master seeds (arbitrary constants frozen
after the estimators were validated across seeds during development), so
every run is reproducible.  Grid sizes not pinned by a criterion are chosen
so that the documented discretisation bias plus three standard errors fits
inside the stated tolerance.

Criterion 8 is known to be unattainable as stated: at eps = 0.02 with 1e6
steps the estimand E[2 eps D] is 0.7343 +- 0.0102 (measured at 3000 trials),
8% below sqrt(2/pi) ~ 0.7979 and 3.9 design standard errors below the
required band floor 0.7740.  The deficit decomposes into barrier-detection
overshoot (~0.583 sqrt(dt) per detection, widening the eps = 0.02 band by
~6% and cutting the count accordingly) plus the incomplete final cycle
(E[U - D] ~ 0.5, i.e. -2 eps * 0.5 ~ -2.5%).  The test asserts the stated
band at the pinned 500 trials and fails honestly rather than hunting a
lucky seed (a +2.2 sigma draw would pass).
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import range_tail_mc_oracle
from pathbars import analytic as A
from pathbars import estimators as E
from pathbars import simulate as S
from pathbars import stability as ST
from pathbars.persistence import (
    barcode,
    count_eps,
    count_eps_crossings,
    rect_count_integral,
    trimmed_length,
)

WORKERS = 2

NEPS_05 = 2.66666660083337481
NEPS_10 = 1.11914323121243639
NRECT_05_05_1 = 0.365574485585078864
SQRT_2_OVER_PI = 0.797884560802865356
DRIFT_TARGET = 0.581976706869326424


def report(name, passed, detail, elapsed, budget):
    status = "PASS" if passed else "FAIL"
    print(f"\n{name}: {status} ({detail}; {elapsed:.1f}s of {budget:.0f}s budget)")
    assert elapsed < budget, f"{name} exceeded its runtime budget"
    assert passed, f"{name}: {detail}"


def test_c01_series_cross_validation():
    t0 = time.time()
    worst = 0.0
    for c in np.geomspace(0.05, 5.0, 50):
        # tight tolerance: at the large end the theta-form series cancels
        # five decades, so the default absolute-style stop is too loose
        a = A.expected_neps_bm_large(c, 1.0, tol=1e-15).value
        b = A.expected_neps_bm_small(c, 1.0, tol=1e-15).value
        worst = max(worst, abs(a - b) / a)
    report(
        "ACCEPT-01 series-cross-validation",
        worst <= 1e-10,
        f"max rel diff {worst:.2e} over 50 points",
        time.time() - t0,
        1.0,
    )


def test_c02_cross_algorithm_identity():
    t0 = time.time()
    seed = S.Seed(20260802)
    spec = S.rademacher_walk(1000)
    eps_values = (0.05, 10.0 / math.sqrt(1000), 0.25, 0.5, 1.0)  # one exact lattice tie
    mismatches = 0
    for trial in range(10_000):
        f = S.sample(spec, seed, trial)
        bc = barcode(f)
        for eps in eps_values:
            if count_eps(bc, eps) != count_eps_crossings(f, eps):
                mismatches += 1
    report(
        "ACCEPT-02 cross-algorithm-identity",
        mismatches == 0,
        f"{mismatches} mismatches over 1e4 walks x 5 eps",
        time.time() - t0,
        30.0,
    )


def test_c03_trimmed_length_integral_identity():
    t0 = time.time()
    seed = S.Seed(20260803)
    worst = 0.0
    for trial in range(1000):
        if trial % 2 == 0:
            f = S.sample(S.rademacher_walk(1000), seed, trial)
        else:
            f = S.sample(S.bm(1.0, 1000), seed, trial)
        eps = (0.1, 0.3, 0.9)[trial % 3]
        lhs = trimmed_length(barcode(f), eps)
        rhs = rect_count_integral(f, eps)
        denom = max(abs(lhs), 1e-9)
        worst = max(worst, abs(lhs - rhs) / denom)
    report(
        "ACCEPT-03 trimmed-length-integral",
        worst <= 1e-12,
        f"max rel err {worst:.2e} over 1e3 paths",
        time.time() - t0,
        30.0,
    )


def test_c04_deterministic_stability():
    t0 = time.time()
    seed = S.Seed(20260804)
    from pathbars.paths import sup_distance

    failures = 0
    for trial in range(1000):
        fine, coarse = S.coupled_pair(S.bm(1.0, 100_000), S.bm(1.0, 1000), seed, trial)
        delta = sup_distance(fine, coarse)
        rep = ST.stability_bound_check(fine, coarse, 4.0 * delta)
        failures += 0 if rep.passed else 1
    report(
        "ACCEPT-04 deterministic-stability",
        failures == 0,
        f"{failures} failures over 1e3 coupled pairs at eps = 4 delta",
        time.time() - t0,
        120.0,
    )


def test_c05_expected_neps_mc_vs_closed_form():
    t0 = time.time()
    seed = S.Seed(20260805)
    spec = S.bm(1.0, 200_000)
    details = []
    ok = True
    for eps, target in ((0.5, NEPS_05), (1.0, NEPS_10)):
        res = E.mc_expectation(spec, E.neps(eps), 2000, seed, WORKERS, with_envelope=True)
        rel = abs(res.mean - target) / target
        ok = ok and rel <= 0.03
        details.append(
            f"eps={eps}: mc={res.mean:.4f} exact={target:.4f} rel={rel:.2%} "
            f"envelope=[{res.envelope[0]:.3f},{res.envelope[1]:.3f}]"
        )
    report(
        "ACCEPT-05 expected-neps-mc",
        ok,
        "; ".join(details),
        time.time() - t0,
        600.0,
    )


def test_c06_expected_nrect_mc_vs_series():
    t0 = time.time()
    seed = S.Seed(20260806)
    spec = S.bm(1.0, 100_000)
    res = E.mc_expectation(spec, E.nrect(0.5, 0.5), 3000, seed, WORKERS, with_envelope=True)
    target = NRECT_05_05_1
    env_lo, env_hi = res.envelope
    allowance = 3 * res.stderr + max(res.mean - env_lo, env_hi - res.mean)
    err = abs(res.mean - target)
    report(
        "ACCEPT-06 expected-nrect-mc",
        err <= allowance,
        f"mc={res.mean:.4f} series={target:.4f} err={err:.4f} allowed={allowance:.4f}",
        time.time() - t0,
        300.0,
    )


def test_c07_qv_proxy():
    t0 = time.time()
    ok = True
    details = []
    res = E.mc_expectation(
        S.bm(1.0, 2_000_000), E.qv_proxy(0.1), 800, S.Seed(20260807), WORKERS
    )
    ok &= abs(res.mean - 1.0133) <= 0.03
    details.append(f"bm: {res.mean:.4f} target 1.0133+-0.03")
    res = E.mc_expectation(
        S.ito_constant(0.0, 2.0, 1.0, 6_000_000),
        E.qv_proxy(0.1),
        500,
        S.Seed(20260857),
        WORKERS,
    )
    ok &= abs(res.mean - 4.0133) <= 0.12
    details.append(f"ito sigma=2: {res.mean:.4f} target 4.0133+-0.12")
    report("ACCEPT-07 qv-proxy", bool(ok), "; ".join(details), time.time() - t0, 600.0)


def test_c08_local_time_downcrossings():
    t0 = time.time()
    seed = S.Seed(20260808)
    res = E.mc_expectation(
        S.bm(1.0, 1_000_000), E.local_time_proxy(0.0, 0.02), 500, seed, WORKERS
    )
    rel = abs(res.mean - SQRT_2_OVER_PI) / SQRT_2_OVER_PI
    report(
        "ACCEPT-08 local-time-downcrossings",
        rel <= 0.03,
        f"mean 2epsD={res.mean:.4f} target {SQRT_2_OVER_PI:.5f} rel={rel:.2%} "
        "(known spec defect: estimand is 0.7343 +- 0.0102 at these pinned "
        "parameters, below the band floor 0.7740)",
        time.time() - t0,
        900.0,
    )


def test_c09_variation_slopes():
    t0 = time.time()
    eps_grid = np.geomspace(0.05, 0.2, 6)
    ok = True
    details = []
    slope, se = E.variation_slope(
        S.bm(1.0, 2**19), eps_grid, 300, S.Seed(20260809), WORKERS
    )
    ok &= abs(slope - 2.0) <= 0.1
    details.append(f"bm: slope={slope:.3f}+-{se:.3f} target 2.0+-0.1")
    # horizon 100 puts the pinned eps window in the self-similar scaling
    # regime of H=0.75 (N^eps ~ 700 bars at the low end)
    slope, se = E.variation_slope(
        S.fbm(0.75, 100.0, 2**21), eps_grid, 40, S.Seed(20260859), WORKERS
    )
    ok &= abs(slope - 4.0 / 3.0) <= 0.15
    details.append(f"fbm H=0.75: slope={slope:.3f}+-{se:.3f} target 1.333+-0.15")
    report("ACCEPT-09 variation-slopes", bool(ok), "; ".join(details), time.time() - t0, 900.0)


def test_c10_tail_equivalence():
    t0 = time.time()
    # validate the closed-form tail against the bridge-corrected MC oracle
    eps_list = (1.0, 2.0, 3.0)
    mc = range_tail_mc_oracle(eps_list, n_paths=1_000_000, n_steps=1000, master=20260810)
    ok = True
    details = []
    for eps, p_mc in zip(eps_list, mc):
        p = A.range_tail_bm(eps, 1.0).value
        se = math.sqrt(p_mc * (1 - p_mc) / 1_000_000)
        z = abs(p_mc - p) / se
        ok &= z <= 3.0
        details.append(f"p({eps})={p:.5f} vs mc {p_mc:.5f} ({z:.1f} se)")
    # the ratio at eps = 2 with the theorem envelope
    res = E.tail_ratio(S.bm(1.0, 100_000), 2.0, 4000, S.Seed(20260860), WORKERS)
    p2 = A.range_tail_bm(2.0, 1.0).value
    lo, hi = E.tail_ratio_bounds(p2)
    in_env = lo - 3 * res.stderr <= res.mean <= hi + 3 * res.stderr
    ok &= in_env
    details.append(f"ratio={res.mean:.4f} envelope=[{lo:.3f},{hi:.4f}]")
    report("ACCEPT-10 tail-equivalence", bool(ok), "; ".join(details), time.time() - t0, 600.0)


def test_c11_drift_ray_formula():
    t0 = time.time()
    # grid fine enough that the barrier-overshoot bias (~2 beta sqrt(dt)
    # of band widening, amplified by 1/(1-q)) is far inside the 5% band
    seed = S.Seed(20260871)
    spec = S.drift_bm(1.0, 30.0, 4_000_000)
    res = E.mc_expectation(spec, E.nrect_ray(1.0, 0.5), 2000, seed, WORKERS)
    rel = abs(res.mean - DRIFT_TARGET) / DRIFT_TARGET
    report(
        "ACCEPT-11 drift-ray-formula",
        rel <= 0.05,
        f"mc={res.mean:.4f} formula={DRIFT_TARGET:.5f} rel={rel:.2%}",
        time.time() - t0,
        600.0,
    )


def test_c12_moment_bound():
    t0 = time.time()
    seed = S.Seed(20260812)
    rep = E.moment_bound_check(S.bm(1.0, 50_000), 1.5, 10_000, seed, WORKERS)
    rows = "; ".join(
        f"k={r.k}: surv={r.survival:.4f} bound={r.bound:.4f}" for r in rep.rows
    )
    report(
        "ACCEPT-12 moment-bound",
        rep.passed and len(rep.rows) >= 1,
        f"p_hat={rep.p_hat:.4f}; {rows}; tightness(k=2)={rep.tightness_k2:.3f}",
        time.time() - t0,
        300.0,
    )


def test_c13_limiting_processes():
    t0 = time.time()
    seed = S.Seed(20260813)
    ok = True
    details = []
    for n_modes in (16, 64, 256):
        rep = ST.convergence_experiment(
            S.levy_partial_sum(n_modes, 4096),
            S.levy_partial_sum(4096, 4096),
            eps=0.5,
            trials=1000,
            seed=seed,
            workers=WORKERS,
        )
        ok &= rep.expectation_ok
        bound = "inf" if math.isinf(rep.omega_bound) else f"{rep.omega_bound:.2f}"
        details.append(
            f"levy n={n_modes}: E|dN|={rep.mean_abs_dn:.3f} <= omega(2d)={bound}"
        )
    trend = ST.empirical_bridge_trend(
        [100, 1000, 10_000], eps=0.3, trials=400, seed=S.Seed(20260863),
        workers=WORKERS, bridge_steps=2**17,
    )
    ok &= trend.monotone_within_ci
    gaps = ", ".join(f"n={r.n_samples}: gap={r.gap:.3f}" for r in trend.rows)
    details.append(f"empirical->bridge gaps [{gaps}] monotone={trend.monotone_within_ci}")
    report("ACCEPT-13 limiting-processes", bool(ok), "; ".join(details), time.time() - t0, 900.0)


def test_c14_experiment_determinism(tmp_path):
    t0 = time.time()
    cfg = f"""[experiment]
kind = expect-neps
trials = 300
workers = 1
seed = 20260814
out_dir = {tmp_path}/w1
format = csv

[process]
family = bm
t = 1.0
n_steps = 20000

[grid]
eps = 0.2,0.5,1.0
"""
    cfg_file = tmp_path / "determinism.ini"
    cfg_file.write_text(cfg)
    outputs = {}
    for workers in (1, 4):
        out_dir = tmp_path / f"w{workers}"
        r = subprocess.run(
            [
                sys.executable,
                "-m",
                "pathbars.cli",
                "experiment",
                "--config",
                str(cfg_file),
                "--workers",
                str(workers),
                "--out-dir",
                str(out_dir),
            ],
            capture_output=True,
            text=True,
            env={k: v for k, v in os.environ.items() if k != "PATHBARS_WORKERS"},
        )
        assert r.returncode == 0, r.stderr
        outputs[workers] = (out_dir / "expect_neps.csv").read_bytes()
    report(
        "ACCEPT-14 experiment-determinism",
        outputs[1] == outputs[4],
        f"CSV bytes identical across workers 1 and 4 ({len(outputs[1])} bytes)",
        time.time() - t0,
        120.0,
    )
