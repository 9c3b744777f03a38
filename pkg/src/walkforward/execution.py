"""Transaction-cost model, net strategy returns, and equity curves.

Costs live in log space: a proportional per-leg cost ``c`` multiplies wealth
by ``(1 - c)``, i.e. adds ``ln(1 - c)`` to the log-return stream. Per bar the
number of legs ``k`` is

    k = 1   on the first bar of an evaluation window (initial entry),
    k = 2   on a reversal (exit one side, enter the other),
    k = 0   otherwise,

plus one extra leg on the last bar when final liquidation is enabled
(off by default: an open position at period end is marked, not closed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import ReturnSeries
from .errors import ValidationError
from .indicators import PositionSeries


@dataclass(frozen=True)
class CostModel:
    """Proportional cost per transaction leg.

    Attributes:
        cost_per_transaction: fraction of wealth paid per leg, e.g. 0.001
            for 0.1%. A Long<->Short reversal is two legs (0.2% total).
        charge_final_exit: also close the open position on the last bar.
    """

    cost_per_transaction: float
    charge_final_exit: bool = False

    def __post_init__(self):
        c = self.cost_per_transaction
        if not (0.0 <= c < 1.0):
            raise ValidationError(f"cost_per_transaction must be in [0, 1), got {c}")

    @property
    def log_cost(self) -> float:
        """ln(1 - c); the additive log-return hit of one leg."""
        return math.log1p(-self.cost_per_transaction)


@dataclass(frozen=True)
class EquityCurve:
    """Cumulative log-return curve; the first point is 0 by construction."""

    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ts = np.ascontiguousarray(self.timestamps, dtype=np.int64)
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        if ts.size != vals.size or ts.ndim != 1:
            raise ValidationError("curve timestamps and values must be 1-d and equal length")
        if ts.size == 0:
            raise ValidationError("empty equity curve")
        ts.setflags(write=False)
        vals.setflags(write=False)

    @property
    def final_value(self) -> float:
        return float(self.values[-1])

    def __len__(self) -> int:
        return int(self.values.size)


def _leg_counts(directions: np.ndarray, charge_final_exit: bool) -> np.ndarray:
    """Transaction legs per bar for one or many position rows (last axis = time)."""
    k = np.zeros(directions.shape, dtype=np.float64)
    k[..., 0] = 1.0  # initial entry
    if directions.shape[-1] > 1:
        k[..., 1:] += 2.0 * (np.diff(directions, axis=-1) != 0)
    if charge_final_exit:
        k[..., -1] += 1.0
    return k


def _net_values(directions: np.ndarray, asset_values: np.ndarray, cost: CostModel) -> np.ndarray:
    """direction * return + k * ln(1-c), broadcasting rows of directions."""
    return directions * asset_values + _leg_counts(directions, cost.charge_final_exit) * cost.log_cost


def strategy_returns(
    asset_returns: ReturnSeries, positions: PositionSeries, cost: CostModel
) -> ReturnSeries:
    """Net strategy log returns for positions applied to asset returns.

    The position at bar t applies to the asset return over (t, t+1], so the
    two series must align one direction per return interval; the caller
    slices off the final (unusable) position when pairing a full position
    series with the returns of the same price series.

    Args:
        asset_returns: asset log returns.
        positions: one direction per return.
        cost: transaction-cost model.

    Returns:
        ReturnSeries of net returns on the asset returns' timestamps.
    """
    if len(positions) != len(asset_returns):
        raise ValidationError(
            f"positions ({len(positions)}) and returns ({len(asset_returns)}) lengths differ"
        )
    net = _net_values(positions.directions, asset_returns.values, cost)
    return ReturnSeries(asset_returns.frequency_minutes, asset_returns.timestamps, net)


def equity_curve(returns: ReturnSeries) -> EquityCurve:
    """Cumulative log-return curve prefixed with 0.

    The leading zero point is stamped one bar step before the first return;
    an empty return series degenerates to the single point (0, 0.0).
    """
    if len(returns) == 0:
        return EquityCurve(np.array([0], dtype=np.int64), np.array([0.0]))
    step = returns.frequency_minutes * 60_000
    ts = np.concatenate(([returns.timestamps[0] - step], returns.timestamps))
    values = np.concatenate(([0.0], np.cumsum(returns.values)))
    return EquityCurve(ts, values)


def count_transactions(positions: PositionSeries) -> int:
    """Total transaction legs: 1 initial entry plus 2 per reversal."""
    if len(positions) == 0:
        return 0
    reversals = int(np.count_nonzero(np.diff(positions.directions)))
    return 1 + 2 * reversals
