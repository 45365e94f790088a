"""Self-contained SVG plots for experiment artifacts.

Plotting is best-effort presentation: data values are deterministic, byte
identity of the SVG is not guaranteed (only the CSV artifacts are).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["loglog_svg"]


def loglog_svg(path, x, y, yerr=None, overlay=None, xlabel="eps", ylabel="mean", title=""):
    """Log-log scatter with decade gridlines and an optional analytic overlay.

    overlay: (x_curve, y_curve, label) or None.  Nonpositive values are
    dropped (cannot appear on log axes).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (x > 0) & (y > 0)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    if yerr is not None:
        yerr = np.asarray(yerr, dtype=float)
        ax.errorbar(
            x[mask], y[mask], yerr=yerr[mask], fmt="o", ms=4, capsize=3,
            label="Monte Carlo",
        )
    else:
        ax.plot(x[mask], y[mask], "o", ms=4, label="Monte Carlo")
    if overlay is not None:
        ox, oy, label = overlay
        ox = np.asarray(ox, dtype=float)
        oy = np.asarray(oy, dtype=float)
        omask = (ox > 0) & (oy > 0)
        ax.plot(ox[omask], oy[omask], "-", lw=1.2, label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.grid(True, which="major", lw=0.6, alpha=0.6)
    ax.grid(True, which="minor", lw=0.3, alpha=0.3)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
