"""Figure rendering for run and comparison artifacts.

Everything renders through the Agg backend straight to files; nothing
here opens a window. Figures sit alongside the delimited outputs so a
run directory is self-describing.
"""
from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .analysis import ExpressivityReport, heatmap_export  # noqa: E402

__all__ = ["heatmap_figure", "metrics_figure", "comparison_figure"]

HEATMAP_PNG = "heatmap.png"
METRICS_PNG = "metrics.png"
COMPARISON_PNG = "comparison.png"


def heatmap_figure(
    report: ExpressivityReport, path: str | Path, axes: tuple[int, int] = (0, 1)
) -> Path:
    """Best-fitness heatmap over two descriptor dimensions.

    Empty cells render in a hatched gray so absence is distinguishable
    from zero fitness.
    """
    grid = heatmap_export(report, axes)
    a, b = axes
    fig, ax = plt.subplots(figsize=(6, 5))
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad(color="0.85")
    lo_a, hi_a = report.bounds[a]
    lo_b, hi_b = report.bounds[b]
    im = ax.imshow(
        np.ma.masked_invalid(grid),
        origin="lower",
        aspect="auto",
        cmap=cmap,
        vmin=0.0,
        extent=(lo_b, hi_b, lo_a, hi_a),
    )
    ax.set_xlabel(report.descriptor_names[b])
    ax.set_ylabel(report.descriptor_names[a])
    ax.set_title(
        f"elite fitness, generation {report.generation} "
        f"({report.filled_cells}/{report.total_cells} cells)"
    )
    fig.colorbar(im, ax=ax, label="fitness")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def metrics_figure(metrics: Sequence[Mapping], path: str | Path) -> Path:
    """Coverage, QD-score, and best-fitness curves over the run."""
    path = Path(path)
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    gens = [m["generation"] for m in metrics]
    for ax, key in zip(axes, ("coverage", "qd_score", "best_fitness")):
        ax.plot(gens, [m[key] for m in metrics])
        ax.set_xlabel("generation")
        ax.set_ylabel(key.replace("_", " "))
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def comparison_figure(results: Sequence[Mapping], path: str | Path) -> Path:
    """Per-algorithm distributions of the final comparison metrics."""
    path = Path(path)
    algos = sorted({r["algorithm"] for r in results})
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    for ax, key in zip(axes, ("coverage", "qd_score", "best_fitness")):
        data = [
            [r[key] for r in results if r["algorithm"] == algo] for algo in algos
        ]
        ax.boxplot(data, tick_labels=algos)
        ax.set_ylabel(key.replace("_", " "))
        ax.tick_params(axis="x", rotation=45)
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
