"""PNG renderings of CLI outputs (optional ``--plot``).

Figures are drawn with the non-interactive Agg backend and saved next to
the CSV files they illustrate.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    _pyplot().close(fig)
    return path


def plot_series(curves, path, xlabel=r"$\omega t$", ylabel="", title=None) -> Path:
    """``curves`` is a list of ``(label, x, y)``."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for label, x, y in curves:
        ax.plot(x, y, lw=1, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(curves) > 1:
        ax.legend(fontsize=8)
    return _save(fig, path)


def plot_surface(x, y, values, path, xlabel, ylabel, title=None, log=False, contours=(),
                 lines=()) -> Path:
    """Color map of ``values[i_x, j_y]`` with optional iso-levels and overlay polylines."""
    plt = _pyplot()
    from matplotlib.colors import LogNorm

    fig, ax = plt.subplots(figsize=(5, 4))
    z = np.asarray(values, dtype=float).T
    norm = None
    if log:
        pos = z[z > 0]
        if pos.size:
            z = np.where(z > 0, z, pos.min())
            norm = LogNorm(vmin=pos.min(), vmax=pos.max())
    mesh = ax.pcolormesh(x, y, z, shading="nearest", norm=norm)
    fig.colorbar(mesh, ax=ax)
    if contours:
        ax.contour(x, y, z, levels=sorted(contours), colors="k", linewidths=0.8)
    for lx, ly in lines:
        ax.plot(lx, ly, "k-", lw=1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_matrix(values, path, title=None, log=True) -> Path:
    """Image of ``values[m, n]`` with ``n`` horizontal and ``m`` vertical."""
    n = np.arange(values.shape[1])
    m = np.arange(values.shape[0])
    return plot_surface(n, m, np.asarray(values).T, path, "n", "m", title=title, log=log)


def plot_wigner(grid, path, title=None) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.5, 4))
    lim = float(np.max(np.abs(grid.values)))
    mesh = ax.pcolormesh(grid.x, grid.p, grid.values.T, shading="nearest", cmap="RdBu_r",
                         vmin=-lim, vmax=lim)
    fig.colorbar(mesh, ax=ax)
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    return _save(fig, path)
