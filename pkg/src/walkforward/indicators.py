"""Exponential moving averages and crossover position signals.

The EMA follows the standard recursive form

    ema[0] = price[0]
    ema[t] = alpha * price[t] + (1 - alpha) * ema[t-1],   alpha = 2 / (n + 1)

and the crossover rule holds Long (+1) whenever the fast EMA is at or above
the slow EMA, Short (-1) otherwise — ties go Long. Positions are defined from
bar 0 (the recursion needs no burn-in).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import lfilter

from .data import PriceSeries
from .errors import ValidationError

#: Default EMA period universe; periods above the threshold count as slow.
DEFAULT_EMA_PERIODS = (5, 7, 10, 15, 20, 30, 40, 50, 100, 150, 200)
FAST_SLOW_THRESHOLD = 35


@dataclass(frozen=True)
class EmaParams:
    """A single EMA period."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"EMA period must be >= 1, got {self.n}")

    @property
    def alpha(self) -> float:
        return 2.0 / (self.n + 1)


@dataclass(frozen=True)
class EmaPair:
    """A fast/slow EMA combination; fast period strictly below the slow one."""

    fast: EmaParams
    slow: EmaParams

    def __post_init__(self):
        if self.fast.n >= self.slow.n:
            raise ValidationError(
                f"fast period must be below slow period, got {self.fast.n}/{self.slow.n}"
            )

    @classmethod
    def of(cls, fast_n: int, slow_n: int) -> "EmaPair":
        return cls(EmaParams(fast_n), EmaParams(slow_n))

    @property
    def label(self) -> str:
        return f"{self.fast.n}/{self.slow.n}"


@dataclass(frozen=True)
class PositionSeries:
    """Direction per bar: +1 Long, -1 Short, one entry per bar from bar 0."""

    timestamps: np.ndarray
    directions: np.ndarray

    def __post_init__(self):
        ts = np.ascontiguousarray(self.timestamps, dtype=np.int64)
        dirs = np.ascontiguousarray(self.directions, dtype=np.int8)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "directions", dirs)
        if ts.ndim != 1 or dirs.ndim != 1 or ts.size != dirs.size:
            raise ValidationError("timestamps and directions must be 1-d arrays of equal length")
        if not np.all(np.abs(dirs) == 1):
            raise ValidationError("directions must be +1 (Long) or -1 (Short)")
        ts.setflags(write=False)
        dirs.setflags(write=False)

    def __len__(self) -> int:
        return int(self.directions.size)


def _ema_core(prices: np.ndarray, alpha: float) -> np.ndarray:
    """EMA recursion along the last axis; works on 1-d vectors and 2-d row batches.

    lfilter evaluates y[t] = alpha*x[t] + (1-alpha)*y[t-1] with the same
    multiply-add sequence as the scalar loop, and the first output is written
    directly so ema[0] == price[0] holds exactly.
    """
    p = np.asarray(prices, dtype=np.float64)
    out = np.empty_like(p)
    out[..., :1] = p[..., :1]
    if p.shape[-1] > 1:
        beta = 1.0 - alpha
        zi = beta * p[..., :1]
        out[..., 1:] = lfilter([alpha], [1.0, -beta], p[..., 1:], axis=-1, zi=zi)[0]
    return out


def ema_matrix(prices: np.ndarray, periods: Sequence[int]) -> np.ndarray:
    """EMAs of one price vector for several periods, stacked as rows."""
    p = np.asarray(prices, dtype=np.float64)
    out = np.empty((len(periods), p.size))
    for i, n in enumerate(periods):
        out[i] = _ema_core(p, EmaParams(n).alpha)
    return out


def ema(series: PriceSeries, params: EmaParams) -> np.ndarray:
    """Exponential moving average of a price series, same length as the input."""
    if len(series) == 0:
        raise ValidationError("cannot compute EMA of an empty series")
    return _ema_core(series.prices, params.alpha)


def crossover_positions(series: PriceSeries, pair: EmaPair) -> PositionSeries:
    """Crossover signal: +1 where the fast EMA is at or above the slow EMA.

    On bar 0 both EMAs equal the price, so the tie rule puts the first bar
    Long.
    """
    fast = ema(series, pair.fast)
    slow = ema(series, pair.slow)
    directions = np.where(fast >= slow, 1, -1).astype(np.int8)
    return PositionSeries(series.timestamps, directions)


def build_universe(
    periods: Iterable[int] = DEFAULT_EMA_PERIODS,
    threshold: int = FAST_SLOW_THRESHOLD,
) -> list[EmaPair]:
    """All fast x slow EMA pairs from a period universe.

    Periods at or below ``threshold`` are fast, the rest slow; the default
    universe gives 6 x 5 = 30 pairs. Pairs come back sorted by
    (fast, slow), which downstream argmax relies on for tie-breaking.
    """
    unique = sorted(set(int(p) for p in periods))
    fasts = [p for p in unique if p <= threshold]
    slows = [p for p in unique if p > threshold]
    if not fasts or not slows:
        raise ValidationError(
            f"period universe {unique} needs entries on both sides of the "
            f"fast/slow threshold {threshold}"
        )
    return [EmaPair.of(f, s) for f in fasts for s in slows]
