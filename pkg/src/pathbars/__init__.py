"""Degree-0 persistence statistics of sampled 1-D paths.

Subpackages:
    paths        sampled piecewise-linear paths and their metric
    persistence  barcodes, crossing counts, trimmed length (exact)
    simulate     reproducible process samplers
    analytic     closed-form series for Brownian-type paths
    estimators   deterministic parallel Monte Carlo estimators
    stability    perturbation bounds and convergence experiments
    harness      experiment runner (CSV / SVG artifacts)
    cli          command line entry point
"""

from .paths import SampledPath, coarsen, evaluate, negate, reparametrize, sup_distance
from .persistence import (
    Bar,
    Barcode,
    CrossingRecord,
    barcode,
    count_eps,
    count_eps_crossings,
    count_rect,
    crossings,
    diagram,
    trimmed_length,
)
from .simulate import ProcessSpec, Seed, coupled_pair, sample

__version__ = "0.1.0"

__all__ = [
    "SampledPath",
    "evaluate",
    "sup_distance",
    "negate",
    "reparametrize",
    "coarsen",
    "Bar",
    "Barcode",
    "CrossingRecord",
    "barcode",
    "count_eps",
    "count_eps_crossings",
    "crossings",
    "count_rect",
    "trimmed_length",
    "diagram",
    "Seed",
    "ProcessSpec",
    "sample",
    "coupled_pair",
    "__version__",
]
