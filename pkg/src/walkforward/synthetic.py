"""Deterministic synthetic price fixtures.

Used by the test suite and handy for demo runs: a seeded geometric random
walk with optional drift regimes, and a writer producing CSV files in the
loader's input format.
"""

from __future__ import annotations

import csv

import numpy as np

from .data import MS_PER_MINUTE, PriceSeries


def random_walk_prices(
    n_bars: int,
    frequency_minutes: int = 60,
    seed: int = 0,
    vol: float = 0.004,
    drift: float = 0.0,
    start_price: float = 100.0,
    start_ms: int = 0,
    regime_bars: int = 0,
    regime_drift: float = 0.0,
    asset_id: str = "SYN",
) -> PriceSeries:
    """Seeded geometric random walk at a fixed bar frequency.

    With ``regime_bars`` > 0 the drift flips between ``drift + regime_drift``
    and ``drift - regime_drift`` every ``regime_bars`` bars, which plants
    alternating trends for strategies to latch onto.
    """
    rng = np.random.default_rng(seed)
    steps = rng.normal(loc=drift, scale=vol, size=n_bars - 1)
    if regime_bars > 0:
        bar_idx = np.arange(1, n_bars)
        sign = np.where((bar_idx // regime_bars) % 2 == 0, 1.0, -1.0)
        steps = steps + sign * regime_drift
    log_prices = np.concatenate(([0.0], np.cumsum(steps)))
    prices = start_price * np.exp(log_prices)
    step_ms = frequency_minutes * MS_PER_MINUTE
    timestamps = start_ms + step_ms * np.arange(n_bars, dtype=np.int64)
    return PriceSeries(asset_id, frequency_minutes, timestamps, prices)


def write_prices_csv(series: PriceSeries, path) -> None:
    """Write a series in the loader's ``timestamp,price`` format."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["timestamp", "price"])
        for ts, price in zip(series.timestamps, series.prices):
            writer.writerow([int(ts), repr(float(price))])
