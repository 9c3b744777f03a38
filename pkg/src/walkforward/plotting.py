"""Figure rendering for CLI reports.

All figures are written as SVG files next to the delimited output. Rendering
is deterministic: the Agg backend, a fixed ``svg.hashsalt``, and a stripped
creation date keep repeated runs byte-identical.
"""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .execution import EquityCurve
from .optimizer import SharpeGrid

matplotlib.rcParams["svg.hashsalt"] = "walkforward"

_SAVE_KWARGS = {"format": "svg", "metadata": {"Date": None}}


def save_heatmap(path, grid: SharpeGrid, title: str) -> None:
    """Sharpe grid as an annotated heatmap (train on x, test on y)."""
    fig, ax = plt.subplots(figsize=(7.5, 6.5))
    masked = np.ma.masked_invalid(grid.values)
    image = ax.imshow(masked, cmap="RdYlGn", aspect="auto", origin="upper")
    ax.set_xticks(range(len(grid.train_axis)), [str(d) for d in grid.train_axis])
    ax.set_yticks(range(len(grid.test_axis)), [str(d) for d in grid.test_axis])
    ax.set_xlabel("train window (days)")
    ax.set_ylabel("test window (days)")
    ax.set_title(title)
    for i in range(len(grid.test_axis)):
        for j in range(len(grid.train_axis)):
            value = grid.values[i, j]
            if np.isfinite(value):
                ax.text(j, i, f"{value:.2f}", ha="center", va="center", fontsize=7)
    fig.colorbar(image, ax=ax, label="sharpe")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_equity_curves(path, curves: Sequence[tuple[str, EquityCurve]], title: str) -> None:
    """Labeled cumulative log-return curves on one axis."""
    fig, ax = plt.subplots(figsize=(9, 5))
    for label, curve in curves:
        days = (curve.timestamps - curve.timestamps[0]) / 86_400_000.0
        ax.plot(days, curve.values, label=label, linewidth=1.0)
    ax.set_xlabel("days since start")
    ax.set_ylabel("cumulative log return")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_cost_sensitivity(
    path, levels: Sequence[float], ann_means: Sequence[float], sharpes: Sequence[float],
    breakeven: Optional[float], title: str,
) -> None:
    """Annualized mean return and sharpe against the cost level."""
    pct = [100.0 * c for c in levels]
    fig, ax = plt.subplots(figsize=(7.5, 5))
    ax.plot(pct, ann_means, marker="o", label="annualized mean return")
    ax.plot(pct, sharpes, marker="s", label="sharpe ratio")
    ax.axhline(0.0, color="black", linewidth=0.8)
    if breakeven is not None and np.isfinite(breakeven):
        ax.axvline(100.0 * breakeven, color="red", linestyle="--", linewidth=0.8,
                   label=f"breakeven ~{100.0 * breakeven:.3f}%")
    ax.set_xlabel("cost per transaction (%)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_histogram(path, values: np.ndarray, original: float, title: str) -> None:
    """Bootstrap sharpe distribution with the original marked."""
    fig, ax = plt.subplots(figsize=(7.5, 5))
    finite = values[np.isfinite(values)]
    if finite.size:
        ax.hist(finite, bins=40, alpha=0.75)
    if np.isfinite(original):
        ax.axvline(original, color="red", linestyle="--", label=f"original {original:.3f}")
        ax.legend(fontsize=8)
    ax.set_xlabel("iteration sharpe")
    ax.set_ylabel("count")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
