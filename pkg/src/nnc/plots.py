"""Figure rendering for the CLI report paths.

Matplotlib is imported lazily and forced onto the Agg backend so rendering
works headless. These functions draw next to the delimited outputs; the CSVs
stay the canonical artifacts.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _mpl():
    import matplotlib
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt
    return plt


def render_heatmap(xs: np.ndarray, ys: np.ndarray, values: np.ndarray,
                   coords: np.ndarray, labels: np.ndarray, title: str, out_path) -> Path:
    """Render a grid quantity with the members scattered on top."""
    plt = _mpl()
    side = int(round(len(values) ** 0.5))
    grid = np.asarray(values, dtype=np.float64).reshape(side, side)
    # Sampled queries sitting exactly on a member get perturbed by ~1e-9, so
    # the raw coordinates are not an exactly monotone lattice. Rebuild the
    # ideal axes; at figure resolution the perturbation is invisible.
    x_axis = xs.reshape(side, side).mean(axis=1)
    y_axis = ys.reshape(side, side).mean(axis=0)
    fig, ax = plt.subplots(figsize=(6.4, 5.6))
    mesh = ax.pcolormesh(x_axis, y_axis, grid.T, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, shrink=0.9)
    for c in np.unique(labels):
        rows = labels == c
        ax.scatter(coords[rows, 0], coords[rows, 1], s=18, edgecolors="white",
                   linewidths=0.5, label=f"class {int(c)}")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(title)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return out_path


def render_bench(records: list[dict], out_path) -> Path:
    """Normalized subset size and time against alpha, one line per algorithm."""
    plt = _mpl()
    fig, (ax_size, ax_time) = plt.subplots(1, 2, figsize=(10.5, 4.2))
    algos = sorted({r["algorithm"] for r in records})
    datasets = sorted({r["dataset"] for r in records})
    for algo in algos:
        for ds in datasets:
            rows = sorted(
                (r for r in records if r["algorithm"] == algo and r["dataset"] == ds),
                key=lambda r: float(r["alpha"]),
            )
            if not rows:
                continue
            label = algo if len(datasets) == 1 else f"{algo} ({ds})"
            # record fields arrive as the reprs written to the CSV
            alphas = [float(r["alpha"]) for r in rows]
            ax_size.plot(alphas, [float(r["normalized_size"]) for r in rows],
                         marker="o", label=label)
            ax_time.plot(alphas, [float(r["normalized_time"]) for r in rows],
                         marker="o", label=label)
    ax_size.set_xlabel("alpha")
    ax_size.set_ylabel("subset size / kappa")
    ax_size.set_title("size")
    ax_time.set_xlabel("alpha")
    ax_time.set_ylabel("time per point (ns)")
    ax_time.set_title("time")
    ax_size.legend(fontsize=8)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path
