"""Transaction-cost sweeps over fixed positions and portfolio combination.

The cost sweep re-prices one fixed position sequence (never re-optimized) at
several cost levels and reports the full metric set per level, plus a linear
interpolation of the level at which the annualized mean return crosses zero.

Portfolios combine cumulative log-return curves in wealth space: with fixed
initial capital shares and no rebalancing, the portfolio wealth is
``W(t) = sum_i w_i * exp(curve_i(t))`` and the combined curve is ``ln W(t)``.
Averaging log returns directly would implement continuous rebalancing — a
different portfolio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .data import ReturnSeries, bars_per_year
from .errors import ValidationError
from .execution import CostModel, EquityCurve, strategy_returns
from .indicators import PositionSeries
from .metrics import PerformanceReport, full_report

#: The seven sweep levels reported by default (0.05% ... 0.50%).
DEFAULT_COST_LEVELS = (0.0005, 0.0007, 0.001, 0.002, 0.003, 0.004, 0.005)


@dataclass(frozen=True)
class CostSweep:
    """Per-level reports for one fixed position sequence."""

    levels: tuple[float, ...]
    reports: tuple[PerformanceReport, ...]
    breakeven_estimate: float  # NaN when the mean return never crosses zero

    def __post_init__(self):
        if len(self.levels) != len(self.reports):
            raise ValidationError("levels and reports must have equal length")


@dataclass(frozen=True)
class PortfolioSpec:
    """Labeled component curves and their initial capital weights."""

    components: tuple[tuple[str, EquityCurve], ...]
    weights: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.components:
            raise ValidationError("portfolio needs at least one component")
        weights = self.weights
        if not weights:
            weights = tuple(1.0 / len(self.components) for _ in self.components)
            object.__setattr__(self, "weights", weights)
        if len(weights) != len(self.components):
            raise ValidationError(
                f"{len(self.components)} components but {len(weights)} weights"
            )
        if any(w < 0 for w in weights):
            raise ValidationError("weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValidationError(f"weights must sum to 1, got {sum(weights)!r}")


def cost_sweep(
    asset_returns: ReturnSeries,
    positions: PositionSeries,
    levels: Sequence[float] = DEFAULT_COST_LEVELS,
    n_year: Optional[float] = None,
) -> CostSweep:
    """Re-price fixed positions at each cost level and locate the breakeven.

    The breakeven estimate linearly interpolates between the two adjacent
    levels where the annualized mean return changes sign; it is NaN when no
    sign change occurs within the swept range.
    """
    levels = tuple(float(c) for c in levels)
    if len(levels) == 0:
        raise ValidationError("cost sweep needs at least one level")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValidationError(f"cost levels must be strictly increasing, got {levels}")
    if n_year is None:
        n_year = bars_per_year(asset_returns.frequency_minutes)
    reports = tuple(
        full_report(strategy_returns(asset_returns, positions, CostModel(c)), n_year)
        for c in levels
    )
    means = [r.ann_mean_return for r in reports]
    breakeven = math.nan
    for i in range(len(levels) - 1):
        lo, hi = means[i], means[i + 1]
        if lo == 0.0:
            breakeven = levels[i]
            break
        if lo > 0.0 > hi:
            breakeven = levels[i] + (levels[i + 1] - levels[i]) * lo / (lo - hi)
            break
    else:
        if means and means[-1] == 0.0:
            breakeven = levels[-1]
    return CostSweep(levels=levels, reports=reports, breakeven_estimate=breakeven)


def combine_portfolio(spec: PortfolioSpec) -> EquityCurve:
    """Wealth-space combination of component curves (no rebalancing).

    All components must share timestamps exactly; the first divergence is
    reported otherwise. The output is normalized so its first point is 0.
    """
    base_ts = spec.components[0][1].timestamps
    for label, curve in spec.components[1:]:
        if curve.timestamps.size != base_ts.size:
            raise ValidationError(
                f"component {label!r} has {curve.timestamps.size} points, "
                f"expected {base_ts.size}"
            )
        mismatch = np.flatnonzero(curve.timestamps != base_ts)
        if mismatch.size:
            at = int(mismatch[0])
            raise ValidationError(
                f"component {label!r} timestamp diverges at index {at}: "
                f"{int(curve.timestamps[at])} != {int(base_ts[at])}"
            )
    stacked = np.vstack([curve.values for _, curve in spec.components])
    weights = np.asarray(spec.weights, dtype=np.float64)[:, None]
    wealth = np.sum(weights * np.exp(stacked), axis=0)
    values = np.log(wealth)
    values -= values[0]  # exact 0 start despite float weight-sum epsilon
    return EquityCurve(base_ts, values)


def align_curves(curves: Sequence[EquityCurve]) -> list[EquityCurve]:
    """Trim curves to their common timestamps and re-base each at 0.

    Used before :func:`combine_portfolio` when components live on different
    bar timelines (e.g. assets with different data gaps).
    """
    if not curves:
        return []
    common = curves[0].timestamps
    for curve in curves[1:]:
        common = np.intersect1d(common, curve.timestamps)
    if common.size == 0:
        raise ValidationError("curves share no timestamps")
    out = []
    for curve in curves:
        idx = np.searchsorted(curve.timestamps, common)
        values = curve.values[idx]
        out.append(EquityCurve(common, values - values[0]))
    return out


def buy_and_hold_returns(asset_returns: ReturnSeries, cost: CostModel) -> ReturnSeries:
    """All-Long strategy over the asset returns: one entry charge, no exit."""
    positions = PositionSeries(
        asset_returns.timestamps, np.ones(len(asset_returns), dtype=np.int8)
    )
    return strategy_returns(asset_returns, positions, cost)


def place_on_timeline(returns: ReturnSeries, timeline: np.ndarray) -> ReturnSeries:
    """Embed returns into a larger timeline, zero elsewhere.

    Every return timestamp must exist in the timeline. This models a strategy
    that sits in cash outside its active windows, putting walk-forward curves
    on the same clock as buy-and-hold benchmarks.
    """
    timeline = np.asarray(timeline, dtype=np.int64)
    idx = np.searchsorted(timeline, returns.timestamps)
    bad = (idx >= timeline.size) | (timeline[np.minimum(idx, timeline.size - 1)] != returns.timestamps)
    if np.any(bad):
        missing = int(returns.timestamps[int(np.flatnonzero(bad)[0])])
        raise ValidationError(f"return timestamp {missing} not present in the timeline")
    values = np.zeros(timeline.size, dtype=np.float64)
    values[idx] = returns.values
    return ReturnSeries(returns.frequency_minutes, timeline, values)
