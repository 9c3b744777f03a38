"""Small builders shared across test modules."""

import numpy as np

from walkforward.data import PriceSeries, ReturnSeries

MS = 60_000
HOUR = 60 * MS


def make_series(prices, frequency_minutes=60, start_ms=0, asset_id="TST"):
    """PriceSeries on a contiguous timestamp grid."""
    prices = np.asarray(prices, dtype=np.float64)
    step = frequency_minutes * MS
    ts = start_ms + step * np.arange(prices.size, dtype=np.int64)
    return PriceSeries(asset_id, frequency_minutes, ts, prices)


def make_returns(values, frequency_minutes=60, start_ms=None):
    """ReturnSeries on a contiguous timestamp grid (first stamp one step in)."""
    values = np.asarray(values, dtype=np.float64)
    step = frequency_minutes * MS
    if start_ms is None:
        start_ms = step
    ts = start_ms + step * np.arange(values.size, dtype=np.int64)
    return ReturnSeries(frequency_minutes, ts, values)
