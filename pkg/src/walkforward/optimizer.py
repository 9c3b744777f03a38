"""Window-pair Sharpe grid, robust (neighbor-smoothed) sharpes, and selection.

Every (train_days, test_days) combination from the window set gets a full
walk-forward run; the resulting out-of-sample sharpes form a grid with one
row per test window and one column per train window. Smoothing blends each
cell 50/50 with the mean of its defined Moore neighbors (8-connected; corners
have 3 neighbors, non-corner edges 5), which damps lucky spikes before the
top-k window pairs are selected.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .data import PriceSeries
from .engine import WindowPair, run_walkforward
from .errors import EngineError, ValidationError
from .execution import CostModel
from .indicators import EmaPair

#: Window lengths (days) evaluated on both axes by default: 9 x 9 = 81 cells.
DEFAULT_WINDOW_DAYS = (1, 2, 3, 5, 7, 10, 14, 21, 28)


@dataclass(frozen=True)
class SharpeGrid:
    """Out-of-sample sharpe per window pair; rows = test_axis, cols = train_axis."""

    train_axis: tuple[int, ...]
    test_axis: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if vals.shape != (len(self.test_axis), len(self.train_axis)):
            raise ValidationError(
                f"grid shape {vals.shape} does not match axes "
                f"{len(self.test_axis)}x{len(self.train_axis)}"
            )
        vals.setflags(write=False)

    @property
    def n_cells(self) -> int:
        return int(self.values.size)

    def cell(self, train_days: int, test_days: int) -> float:
        i = self.test_axis.index(test_days)
        j = self.train_axis.index(train_days)
        return float(self.values[i, j])


@dataclass(frozen=True)
class SmoothedGrid(SharpeGrid):
    """Robust sharpe grid: same axes as its source, neighbor-smoothed values."""


def moore_neighbors(i: int, j: int, n_rows: int, n_cols: int) -> Iterator[tuple[int, int]]:
    """Coordinates of the 8-connected neighborhood clipped to the grid."""
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            a, b = i + di, j + dj
            if 0 <= a < n_rows and 0 <= b < n_cols:
                yield a, b


def build_grid(
    series: PriceSeries,
    window_set: Sequence[int],
    ema_universe: Sequence[EmaPair],
    cost: CostModel,
    n_year: Optional[float] = None,
    *,
    threads: int = 1,
    rolling: bool = False,
) -> SharpeGrid:
    """Run the walk-forward for every window pair in the set.

    A window whose run fails (no valid segment, series too short) leaves an
    undefined (NaN) cell; the grid build continues. Cells are independent, so
    they may be evaluated in parallel — results are collected in input order
    and are bitwise-identical for any thread count.
    """
    axis = tuple(sorted(set(int(d) for d in window_set)))
    if not axis:
        raise ValidationError("window set is empty")
    cells = [(train, test) for test in axis for train in axis]

    def one(cell: tuple[int, int]) -> float:
        train, test = cell
        try:
            run = run_walkforward(
                series, WindowPair(train, test), ema_universe, cost, n_year, rolling=rolling
            )
        except EngineError:
            return math.nan
        return run.total_sharpe

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(one, cells))
    else:
        values = [one(c) for c in cells]
    grid = np.asarray(values, dtype=np.float64).reshape(len(axis), len(axis))
    return SharpeGrid(train_axis=axis, test_axis=axis, values=grid)


def smooth(grid: SharpeGrid) -> SmoothedGrid:
    """Robust sharpe: half the cell's own value, half its neighbors' mean.

    Undefined (NaN) neighbors are excluded from the mean; a defined cell with
    no defined neighbor keeps its own value; an undefined cell stays
    undefined.
    """
    v = grid.values
    n_rows, n_cols = v.shape
    out = np.full_like(v, np.nan)
    for i in range(n_rows):
        for j in range(n_cols):
            own = v[i, j]
            if math.isnan(own):
                continue
            neighbors = [
                v[a, b] for a, b in moore_neighbors(i, j, n_rows, n_cols)
                if not math.isnan(v[a, b])
            ]
            if neighbors:
                out[i, j] = 0.5 * own + 0.5 * (sum(neighbors) / len(neighbors))
            else:
                out[i, j] = own
    return SmoothedGrid(train_axis=grid.train_axis, test_axis=grid.test_axis, values=out)


def select_top_k(smoothed: SmoothedGrid, k: int = 2) -> list[WindowPair]:
    """The k window pairs with the largest smoothed sharpe.

    Ties break toward the larger train window, then the larger test window,
    so the order is total and deterministic.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    ranked = []
    for i, test_days in enumerate(smoothed.test_axis):
        for j, train_days in enumerate(smoothed.train_axis):
            value = smoothed.values[i, j]
            if not math.isnan(value):
                ranked.append((value, train_days, test_days))
    if len(ranked) < k:
        raise ValidationError(f"grid has {len(ranked)} defined cells, fewer than k={k}")
    ranked.sort(key=lambda t: (-t[0], -t[1], -t[2]))
    return [WindowPair(train, test) for _, train, test in ranked[:k]]
