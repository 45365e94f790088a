"""Experiment configuration: a flat INI file with three sections.

Schema (all keys shown; per-kind requirements validated before running):

    [experiment]
    kind = expect-neps | expect-nrect | tail | slope | localtime | qv |
           stability | moment-bound | drift-nrect
    trials = 2000
    workers = 1            ; PATHBARS_WORKERS env var overrides
    seed = 42
    out_dir = out
    format = csv | svg | both

    [process]
    family = bm | drift_bm | bridge | ito_constant | ou | rademacher |
             empirical | levy | fbm | time_changed_bm
    t = 1.0
    n_steps = 1000
    mu = 0.0               ; drift_bm, ito_constant
    sigma = 1.0            ; ito_constant, ou
    theta = 1.0            ; ou
    hurst = 0.5            ; fbm
    n_modes = 0            ; levy
    n_samples = 0          ; empirical
    qv_times = 0,1         ; time_changed_bm (comma list)
    qv_values = 0,1        ; time_changed_bm (comma list)

    [grid]
    eps = 0.1,0.2,0.5      ; comma list of thresholds
    x = 0.5                ; level for rectangle/local-time kinds
    a = 2,4,8              ; Markov-bound multipliers (stability)
    n = 16,64,256          ; approximant sizes (stability)
    variant = levy | coarsen | empirical-bridge   ; stability only
    target = 4096          ; stability: target modes / fine steps

Floats round-trip losslessly (written with repr), so a config parsed from
its own serialisation is equal to the original.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError
from .simulate import FAMILIES, ProcessSpec

__all__ = ["ExperimentConfig", "EXPERIMENT_KINDS"]

EXPERIMENT_KINDS = (
    "expect-neps",
    "expect-nrect",
    "tail",
    "slope",
    "localtime",
    "qv",
    "stability",
    "moment-bound",
    "drift-nrect",
)

FORMATS = ("csv", "svg", "both")
VARIANTS = ("levy", "coarsen", "empirical-bridge")

_PROCESS_FLOAT_KEYS = ("t", "mu", "sigma", "theta", "hurst")
_PROCESS_INT_KEYS = ("n_steps", "n_modes", "n_samples")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    process: ProcessSpec
    trials: int
    seed: int
    workers: int = 1
    out_dir: str = "out"
    fmt: str = "csv"
    eps: tuple = ()
    x: Optional[float] = None
    a: tuple = (2.0, 4.0, 8.0)
    n: tuple = ()
    variant: Optional[str] = None
    target: Optional[int] = None

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"experiment.kind: unknown kind {self.kind!r}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"experiment.format: must be one of {FORMATS}, got {self.fmt!r}")
        if self.trials < 2:
            raise ConfigError("experiment.trials: must be at least 2")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("experiment.seed: must fit in 64 unsigned bits")
        if self.variant is not None and self.variant not in VARIANTS:
            raise ConfigError(f"grid.variant: must be one of {VARIANTS}, got {self.variant!r}")


def _parse_float_list(text: str, key: str) -> tuple:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {text!r}") from None


def _parse_int_list(text: str, key: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated integers, got {text!r}") from None


def _get(section, key, parse, default=None, required=False, where=""):
    if key not in section:
        if required:
            raise ConfigError(f"{where}.{key}: required key is missing")
        return default
    raw = section[key]
    try:
        return parse(raw)
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"{where}.{key}: cannot parse {raw!r}") from None


def load_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for sec in parser.sections():
        if sec not in ("experiment", "process", "grid"):
            raise ConfigError(f"unknown section [{sec}]")
    if "experiment" not in parser:
        raise ConfigError("experiment: required section is missing")
    if "process" not in parser:
        raise ConfigError("process: required section is missing")

    exp = parser["experiment"]
    allowed_exp = {"kind", "trials", "workers", "seed", "out_dir", "format"}
    for key in exp:
        if key not in allowed_exp:
            raise ConfigError(f"experiment.{key}: unknown key")
    kind = _get(exp, "kind", str, required=True, where="experiment")
    trials = _get(exp, "trials", int, required=True, where="experiment")
    workers = _get(exp, "workers", int, default=1, where="experiment")
    seed = _get(exp, "seed", int, required=True, where="experiment")
    out_dir = _get(exp, "out_dir", str, default="out", where="experiment")
    fmt = _get(exp, "format", str, default="csv", where="experiment")

    proc = parser["process"]
    allowed_proc = set(_PROCESS_FLOAT_KEYS) | set(_PROCESS_INT_KEYS) | {
        "family",
        "qv_times",
        "qv_values",
    }
    for key in proc:
        if key not in allowed_proc:
            raise ConfigError(f"process.{key}: unknown key")
    family = _get(proc, "family", str, required=True, where="process")
    if family not in FAMILIES:
        raise ConfigError(f"process.family: unknown family {family!r}")
    kwargs = {}
    for key in _PROCESS_FLOAT_KEYS:
        val = _get(proc, key, float, where="process")
        if val is not None:
            kwargs[key] = val
    for key in _PROCESS_INT_KEYS:
        val = _get(proc, key, int, where="process")
        if val is not None:
            kwargs[key] = val
    for key in ("qv_times", "qv_values"):
        if key in proc:
            kwargs[key] = _parse_float_list(proc[key], f"process.{key}")
    try:
        spec = ProcessSpec(family, **kwargs)
    except Exception as exc:
        raise ConfigError(f"process: {exc}") from None

    eps: tuple = ()
    x = None
    a: tuple = (2.0, 4.0, 8.0)
    n: tuple = ()
    variant = None
    target = None
    if "grid" in parser:
        grid = parser["grid"]
        allowed_grid = {"eps", "x", "a", "n", "variant", "target"}
        for key in grid:
            if key not in allowed_grid:
                raise ConfigError(f"grid.{key}: unknown key")
        if "eps" in grid:
            eps = _parse_float_list(grid["eps"], "grid.eps")
        if "x" in grid:
            x = _get(grid, "x", float, where="grid")
        if "a" in grid:
            a = _parse_float_list(grid["a"], "grid.a")
        if "n" in grid:
            n = _parse_int_list(grid["n"], "grid.n")
        variant = _get(grid, "variant", str, where="grid")
        target = _get(grid, "target", int, where="grid")

    return ExperimentConfig(
        kind=kind,
        process=spec,
        trials=trials,
        seed=seed,
        workers=workers,
        out_dir=out_dir,
        fmt=fmt,
        eps=eps,
        x=x,
        a=a,
        n=n,
        variant=variant,
        target=target,
    )


def load_config_file(path) -> ExperimentConfig:
    with open(path, "r") as fh:
        return load_config(fh.read())


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialise a config to INI text; load_config(dump_config(c)) == c."""
    parser = configparser.ConfigParser()
    parser["experiment"] = {
        "kind": cfg.kind,
        "trials": str(cfg.trials),
        "workers": str(cfg.workers),
        "seed": str(cfg.seed),
        "out_dir": cfg.out_dir,
        "format": cfg.fmt,
    }
    spec = cfg.process
    proc = {"family": spec.family, "t": repr(spec.t), "n_steps": str(spec.n_steps)}
    if spec.family in ("drift_bm", "ito_constant"):
        proc["mu"] = repr(spec.mu)
    if spec.family in ("ito_constant", "ou"):
        proc["sigma"] = repr(spec.sigma)
    if spec.family == "ou":
        proc["theta"] = repr(spec.theta)
    if spec.family == "fbm":
        proc["hurst"] = repr(spec.hurst)
    if spec.family == "levy":
        proc["n_modes"] = str(spec.n_modes)
    if spec.family == "empirical":
        proc["n_samples"] = str(spec.n_samples)
    if spec.family == "time_changed_bm":
        proc["qv_times"] = ",".join(repr(v) for v in spec.qv_times)
        proc["qv_values"] = ",".join(repr(v) for v in spec.qv_values)
    parser["process"] = proc
    grid = {}
    if cfg.eps:
        grid["eps"] = ",".join(repr(v) for v in cfg.eps)
    if cfg.x is not None:
        grid["x"] = repr(cfg.x)
    grid["a"] = ",".join(repr(v) for v in cfg.a)
    if cfg.n:
        grid["n"] = ",".join(str(v) for v in cfg.n)
    if cfg.variant is not None:
        grid["variant"] = cfg.variant
    if cfg.target is not None:
        grid["target"] = str(cfg.target)
    parser["grid"] = grid
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()
