"""Optional PNG rendering of the data the CLI writes.

Only imported when ``--plot`` is given, so matplotlib stays off the hot path.
"""

from __future__ import annotations

import contextlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "lines.linewidth": 1.0,
    "lines.markersize": 3,
    "figure.dpi": 120,
}


@contextlib.contextmanager
def figure(path, nrows=1, ncols=1, figsize=(5, 3.5)):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(nrows, ncols, figsize=figsize, squeeze=False)
        try:
            yield fig, ax
            fig.tight_layout()
            fig.savefig(path)
        finally:
            plt.close(fig)


def plot_fig0(rows, path, max_size=20):
    panels = sorted({r[2] for r in rows}, key=lambda p: (p[0], ["planar", "cylinder", "torus"].index(p[2:])))
    with figure(path, 2, 3, figsize=(9, 6)) as (fig, ax):
        for k, panel in enumerate(panels):
            grid = np.zeros((max_size, max_size))
            for m1, m2, p, s in rows:
                if p == panel:
                    grid[m1 - 1, m2 - 1] = s
            a = ax[k // 3, k % 3]
            a.imshow(grid, origin="lower", cmap="Greys", extent=(0.5, max_size + 0.5, 0.5, max_size + 0.5))
            a.set_title(panel)
            a.set_xlabel("m2")
            a.set_ylabel("m1")


def plot_sweep(result, path):
    log = result.param == "M"
    xs = [p.value for p in result.points]
    with figure(path) as (fig, ax):
        a = ax[0, 0]
        for v in range(result.graph.n):
            ys = [p.mean_error[v] for p in result.points]
            a.plot(xs, ys, marker="o", label=str(v + 1))
        if log:
            a.set_xscale("log")
            a.set_yscale("log")
        a.set_xlabel(result.param)
        a.set_ylabel("mean reconstruction error")
        a.set_title(f"{result.axis.value}-field")
        a.legend(ncol=2, title="vertex")


def plot_distance_histogram(distances, path):
    d = np.asarray(distances, dtype=float)
    with figure(path) as (fig, ax):
        a = ax[0, 0]
        bins = np.logspace(np.log10(max(d.min(), 1e-12)), np.log10(max(d.max(), 1e-11)), 30)
        a.hist(d, bins=bins)
        a.set_xscale("log")
        a.set_xlabel("squared arrow distance")
        a.set_ylabel("count")
