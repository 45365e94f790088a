"""Reproducible samplers for the process families under study.

Every sampler is a pure function of (spec, seed, trial).  Per-trial random
streams come from the Philox counter-based generator keyed on the pair
(master seed, trial index), so distinct trials give independent streams and
any trial can be regenerated in isolation; results are reproducible across
runs and worker counts for a fixed numpy version.  Trial indices >= 2^62
are reserved for auxiliary streams (bootstrap resampling and the like).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dst
from scipy.signal import lfilter

from .errors import DomainError
from .paths import SampledPath, coarsen

__all__ = [
    "Seed",
    "ProcessSpec",
    "AUX_TRIAL_BASE",
    "bm",
    "drift_bm",
    "bridge",
    "ito_constant",
    "ou",
    "rademacher_walk",
    "empirical_process",
    "levy_partial_sum",
    "fbm",
    "time_changed_bm",
    "sample",
    "coupled_pair",
    "interpolation_sup_error",
]

AUX_TRIAL_BASE = 2**62

FAMILIES = (
    "bm",
    "drift_bm",
    "bridge",
    "ito_constant",
    "ou",
    "rademacher",
    "empirical",
    "levy",
    "fbm",
    "time_changed_bm",
)


@dataclass(frozen=True)
class Seed:
    """Master seed; per-trial streams are Philox(key=(master, trial))."""

    master: int

    def __post_init__(self):
        if not 0 <= self.master < 2**64:
            raise DomainError("master seed must fit in 64 unsigned bits")

    def stream(self, trial: int) -> np.random.Generator:
        key = np.array([self.master, trial], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class ProcessSpec:
    """Parametric description of one process family plus its grid size."""

    family: str
    t: float = 1.0
    n_steps: int = 1000
    mu: float = 0.0
    sigma: float = 1.0
    theta: float = 1.0
    hurst: float = 0.5
    n_modes: int = 0
    n_samples: int = 0
    qv_times: tuple = field(default=())
    qv_values: tuple = field(default=())

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown process family {self.family!r}")
        if not self.t > 0:
            raise DomainError("t must be positive")
        if self.n_steps < 2:
            raise DomainError("n_steps must be at least 2")
        if self.sigma < 0:
            raise DomainError("sigma must be nonnegative")
        if self.family in ("bridge", "empirical", "levy") and self.t != 1.0:
            raise DomainError(f"family {self.family!r} is defined on [0, 1]")
        if self.family == "fbm" and not 0.0 < self.hurst < 1.0:
            raise DomainError("hurst must be in (0, 1)")
        if self.family == "levy":
            if self.n_modes < 1:
                raise DomainError("levy requires n_modes >= 1")
            if self.n_steps < self.n_modes:
                raise DomainError("levy requires n_steps >= n_modes")
        if self.family == "empirical" and self.n_samples < 1:
            raise DomainError("empirical requires n_samples >= 1")
        if self.family == "time_changed_bm":
            qt = np.asarray(self.qv_times, dtype=float)
            qvv = np.asarray(self.qv_values, dtype=float)
            if qt.shape != qvv.shape or qt.size < 2:
                raise DomainError("time_changed_bm needs matching qv_times/qv_values")
            if qt[0] != 0.0 or qvv[0] != 0.0:
                raise DomainError("qv must start at qv(0) = 0")
            if np.any(np.diff(qt) <= 0) or np.any(np.diff(qvv) < 0):
                raise DomainError("qv must be a nondecreasing function of increasing times")
            if qt[-1] < self.t:
                raise DomainError("qv must be defined up to t")

    def fingerprint(self) -> str:
        used = {"t": self.t, "n_steps": self.n_steps}
        if self.family in ("drift_bm", "ito_constant"):
            used["mu"] = self.mu
        if self.family in ("ito_constant", "ou"):
            used["sigma"] = self.sigma
        if self.family == "ou":
            used["theta"] = self.theta
        if self.family == "fbm":
            used["hurst"] = self.hurst
        if self.family == "levy":
            used["n_modes"] = self.n_modes
        if self.family == "empirical":
            used["n_samples"] = self.n_samples
        if self.family == "time_changed_bm":
            used["qv_times"] = tuple(self.qv_times)
            used["qv_values"] = tuple(self.qv_values)
        inner = ",".join(f"{k}={v!r}" for k, v in used.items())
        return f"{self.family}({inner})"


def bm(t=1.0, n_steps=1000) -> ProcessSpec:
    return ProcessSpec("bm", t=t, n_steps=n_steps)


def drift_bm(mu, t=1.0, n_steps=1000) -> ProcessSpec:
    return ProcessSpec("drift_bm", t=t, n_steps=n_steps, mu=mu)


def bridge(n_steps=1000) -> ProcessSpec:
    return ProcessSpec("bridge", t=1.0, n_steps=n_steps)


def ito_constant(mu, sigma, t=1.0, n_steps=1000) -> ProcessSpec:
    return ProcessSpec("ito_constant", t=t, n_steps=n_steps, mu=mu, sigma=sigma)


def ou(theta, sigma, t=1.0, n_steps=1000) -> ProcessSpec:
    return ProcessSpec("ou", t=t, n_steps=n_steps, theta=theta, sigma=sigma)


def rademacher_walk(n) -> ProcessSpec:
    return ProcessSpec("rademacher", t=1.0, n_steps=n)


def empirical_process(n_samples, n_steps=1000) -> ProcessSpec:
    return ProcessSpec("empirical", t=1.0, n_steps=n_steps, n_samples=n_samples)


def levy_partial_sum(n_modes, n_steps=None) -> ProcessSpec:
    if n_steps is None:
        n_steps = max(int(n_modes), 1024)
    return ProcessSpec("levy", t=1.0, n_steps=n_steps, n_modes=n_modes)


def fbm(hurst, t=1.0, n_steps=1024) -> ProcessSpec:
    return ProcessSpec("fbm", t=t, n_steps=n_steps, hurst=hurst)


def time_changed_bm(qv: SampledPath, t=None, n_steps=1000) -> ProcessSpec:
    if t is None:
        t = float(qv.times[-1])
    return ProcessSpec(
        "time_changed_bm",
        t=t,
        n_steps=n_steps,
        qv_times=tuple(float(v) for v in qv.times),
        qv_values=tuple(float(v) for v in qv.values),
    )


def _grid(spec: ProcessSpec) -> np.ndarray:
    return np.linspace(0.0, spec.t, spec.n_steps + 1)


def _bm_values(spec, rng) -> np.ndarray:
    dt = spec.t / spec.n_steps
    inc = rng.standard_normal(spec.n_steps) * math.sqrt(dt)
    out = np.empty(spec.n_steps + 1)
    out[0] = 0.0
    np.cumsum(inc, out=out[1:])
    return out


def _fgn_circulant(n: int, hurst: float, rng) -> np.ndarray:
    """Exact stationary fractional Gaussian noise via circulant embedding.

    Embeds the n x n autocovariance in a 2n circulant whose FFT eigenvalues
    are nonnegative for every 0 < H < 1; a tiny negative eigenvalue beyond
    rounding noise means the embedding failed and is reported.
    """
    k = np.arange(n + 1, dtype=np.float64)
    two_h = 2.0 * hurst
    gamma = 0.5 * ((k + 1) ** two_h - 2.0 * k**two_h + np.abs(k - 1) ** two_h)
    c = np.concatenate([gamma, gamma[-2:0:-1]])
    lam = np.fft.fft(c).real
    if lam.min() < -1e-8 * max(lam.max(), 1.0):
        raise RuntimeError(
            f"circulant embedding produced negative eigenvalue {lam.min():g} "
            f"(n={n}, hurst={hurst}); this should not happen for 0 < H < 1"
        )
    lam = np.maximum(lam, 0.0)
    m = 2 * n
    v1 = rng.standard_normal(n + 1)
    v2 = rng.standard_normal(n - 1)
    w = np.empty(m, dtype=np.complex128)
    w[0] = math.sqrt(lam[0] / m) * v1[0]
    w[1:n] = np.sqrt(lam[1:n] / (2.0 * m)) * (v1[1:n] + 1j * v2)
    w[n] = math.sqrt(lam[n] / m) * v1[n]
    w[n + 1 :] = np.conj(w[1:n][::-1])
    return np.fft.fft(w).real[:n]


def _empirical_values(spec, rng):
    """Scaled uniform empirical process sqrt(n) (F_n(t) - t) as a PL path.

    The process is linear between jumps, so only the jumps need refining:
    each jump abscissa u contributes grid points u - delta and u with delta
    below the smallest breakpoint gap, preserving the sup norm up to delta.
    PL smoothing can shorten a bar by at most the jump width.
    """
    n = spec.n_samples
    u = np.sort(rng.random(n))
    uu = np.unique(u)
    base = np.linspace(0.0, 1.0, spec.n_steps + 1)
    gaps = np.diff(np.concatenate([[0.0], uu, [1.0]]))
    min_gap = gaps[gaps > 0].min()
    delta = max(min(min_gap, 1.0 / spec.n_steps) / 8.0, 1e-15)
    grid = np.unique(np.concatenate([base, uu - delta, uu]))
    count = np.searchsorted(u, grid, side="right")
    values = math.sqrt(n) * (count / n - grid)
    return grid, values


def sample(spec: ProcessSpec, seed: Seed, trial: int) -> SampledPath:
    """Draw one path of the given family on its uniform grid."""
    rng = seed.stream(trial)
    times = _grid(spec)
    fam = spec.family

    if fam == "bm":
        return SampledPath(times, _bm_values(spec, rng))

    if fam == "drift_bm":
        return SampledPath(times, _bm_values(spec, rng) + spec.mu * times)

    if fam == "bridge":
        b = _bm_values(spec, rng)
        return SampledPath(times, b - times * b[-1])

    if fam == "ito_constant":
        # Euler-Maruyama; exact for constant coefficients
        return SampledPath(times, spec.sigma * _bm_values(spec, rng) + spec.mu * times)

    if fam == "ou":
        # Euler-Maruyama, strong error O(sqrt(dt))
        dt = spec.t / spec.n_steps
        noise = spec.sigma * math.sqrt(dt) * rng.standard_normal(spec.n_steps)
        x = lfilter([1.0], [1.0, -(1.0 - spec.theta * dt)], noise)
        return SampledPath(times, np.concatenate([[0.0], x]))

    if fam == "rademacher":
        n = spec.n_steps
        signs = rng.integers(0, 2, n) * 2.0 - 1.0
        vals = np.empty(n + 1)
        vals[0] = 0.0
        np.cumsum(signs / math.sqrt(n), out=vals[1:])
        return SampledPath(times, vals)

    if fam == "empirical":
        grid, values = _empirical_values(spec, rng)
        return SampledPath(grid, values)

    if fam == "levy":
        xi = rng.standard_normal(spec.n_modes)
        return SampledPath(times, _levy_values(times, xi, spec.n_modes))

    if fam == "fbm":
        dt = spec.t / spec.n_steps
        fgn = _fgn_circulant(spec.n_steps, spec.hurst, rng)
        vals = np.empty(spec.n_steps + 1)
        vals[0] = 0.0
        np.cumsum(fgn * dt**spec.hurst, out=vals[1:])
        return SampledPath(times, vals)

    if fam == "time_changed_bm":
        clock = np.interp(times, np.asarray(spec.qv_times), np.asarray(spec.qv_values))
        inc = rng.standard_normal(spec.n_steps) * np.sqrt(np.maximum(np.diff(clock), 0.0))
        vals = np.empty(spec.n_steps + 1)
        vals[0] = 0.0
        np.cumsum(inc, out=vals[1:])
        return SampledPath(times, vals)

    raise DomainError(f"unknown family {fam!r}")


def _levy_values(times, xi, n_modes) -> np.ndarray:
    """xi_0 t + (sqrt(2)/pi) sum_{k<n_modes} xi_k sin(pi k t) / k on a uniform grid.

    On the uniform grid of [0, 1] the sine sum is a type-I discrete sine
    transform of the weighted coefficients.
    """
    m = times.shape[0] - 1
    vals = xi[0] * times
    if n_modes > 1:
        coeff = np.zeros(m - 1)
        ks = np.arange(1, n_modes)
        coeff[: n_modes - 1] = xi[1:n_modes] / ks
        sine = 0.5 * dst(coeff, type=1)  # sum_k coeff_k sin(pi k j / m)
        vals = vals.copy()
        vals[1:m] += (math.sqrt(2.0) / math.pi) * sine
    return vals


_COUPLINGS = ("levy modes", "bm coarsen")


def coupled_pair(spec_a: ProcessSpec, spec_b: ProcessSpec, seed: Seed, trial: int):
    """Two paths driven by identical randomness, for the supported couplings.

    Supported: two sine-series partial sums sharing their Gaussian
    coefficients, and a Brownian path with its stride-coarsened version.
    The empirical process and the bridge are deliberately not coupled: the
    strong approximation theorem is existential, so those are compared in
    distribution only.
    """
    if spec_a.family == "levy" and spec_b.family == "levy":
        if spec_a.n_steps != spec_b.n_steps or spec_a.t != spec_b.t:
            raise DomainError("coupled sine series need a common grid")
        rng = seed.stream(trial)
        xi = rng.standard_normal(max(spec_a.n_modes, spec_b.n_modes))
        times = _grid(spec_a)
        fa = SampledPath(times, _levy_values(times, xi, spec_a.n_modes))
        fb = SampledPath(times, _levy_values(times, xi, spec_b.n_modes))
        return fa, fb

    if spec_a.family == "bm" and spec_b.family == "bm":
        hi, lo = (spec_a, spec_b) if spec_a.n_steps >= spec_b.n_steps else (spec_b, spec_a)
        if hi.t != lo.t or hi.n_steps % lo.n_steps != 0:
            raise DomainError("coarsening coupling needs commensurate grids")
        fine = sample(hi, seed, trial)
        coarse = coarsen(fine, hi.n_steps // lo.n_steps)
        if spec_a is hi:
            return fine, coarse
        return coarse, fine

    raise DomainError(
        f"unsupported coupling ({spec_a.family}, {spec_b.family}); "
        f"supported: {_COUPLINGS} (empirical vs bridge is compared in "
        "distribution, not pathwise)"
    )


def interpolation_sup_error(spec: ProcessSpec):
    """Heuristic bound on the sup distance between the sampled PL path and
    the underlying continuous process: scale * dt^H * sqrt(2 log n_steps).

    Used to report stability envelopes around grid-based estimates; returns
    None for families that are their own PL objects (walks, partial sums,
    empirical paths).
    """
    fam = spec.family
    dt = spec.t / spec.n_steps
    if fam in ("bm", "drift_bm", "bridge"):
        scale, h = 1.0, 0.5
    elif fam in ("ito_constant", "ou"):
        scale, h = spec.sigma, 0.5
    elif fam == "fbm":
        scale, h = 1.0, spec.hurst
    elif fam == "time_changed_bm":
        dqv = np.diff(np.interp(_grid(spec), spec.qv_times, spec.qv_values))
        return math.sqrt(max(dqv.max(), 0.0) * 2.0 * math.log(max(spec.n_steps, 2)))
    else:
        return None
    return scale * dt**h * math.sqrt(2.0 * math.log(max(spec.n_steps, 2)))
