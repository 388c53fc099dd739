"""Figure rendering for the report outputs.

Each function takes already-computed rows (the same data written to the
delimited files) and renders a PNG/PDF next to them. Rendering is
optional everywhere; the delimited files remain the primary output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_growth_grid",
    "plot_stopping_times",
    "plot_confseq_widths",
    "plot_bench",
]


def plot_growth_grid(rows, out_path) -> None:
    """Two heatmaps over (m, mu): growth rate and ratio to best achievable."""
    ms = sorted({r[0] for r in rows})
    mus = sorted({r[1] for r in rows})
    index = {v: i for i, v in enumerate(ms)}
    jndex = {v: j for j, v in enumerate(mus)}
    g = np.full((len(mus), len(ms)), np.nan)
    f = np.full((len(mus), len(ms)), np.nan)
    for m, mu, gval, fval in rows:
        g[jndex[mu], index[m]] = gval
        if fval is not None:
            f[jndex[mu], index[m]] = fval
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    extent = (min(ms), max(ms), min(mus), max(mus))
    for ax, data, title in ((axes[0], g, "growth rate"), (axes[1], f, "ratio to best")):
        im = ax.imshow(data, origin="lower", extent=extent, aspect="auto", cmap="magma")
        ax.set_xlabel("hypothesis m")
        ax.set_ylabel("true mean")
        ax.set_title(title)
        fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_stopping_times(results, out_path) -> None:
    """Histogram of final stopping times over complete paths."""
    finals = [r.taus[-1] for r in results if r.complete and r.taus]
    fig, ax = plt.subplots(figsize=(6, 4))
    if finals:
        ax.hist(finals, bins=min(30, max(5, len(finals) // 4)), color="#336699")
    ax.set_xlabel("stopping time (observations)")
    ax.set_ylabel("paths")
    ax.set_title(f"stopping times over {len(finals)} complete paths")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_confseq_widths(rows, out_path) -> None:
    """Interval width against time on a log scale."""
    ts = [r[0] for r in rows]
    widths = [max(r[3] - r[2], 1e-12) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ts, widths)
    ax.set_yscale("log")
    ax.set_xlabel("time")
    ax.set_ylabel("interval width")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_bench(rows, out_path) -> None:
    """Bar chart of mean wall time per method with standard-error bars."""
    labels = [r.method for r in rows]
    means = [r.mean_s for r in rows]
    errs = [r.se_s for r in rows]
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(rows)), 4))
    ax.bar(range(len(rows)), means, yerr=errs, color="#446688", capsize=4)
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=20)
    ax.set_ylabel("seconds per path")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
