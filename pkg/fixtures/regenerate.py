#!/usr/bin/env python3
"""Regenerate the bundled synthetic fixture (fixtures/synthetic.csv).

The fixture is a seeded geometric random walk with weekly alternating drift
regimes: 10,000 hourly bars starting 2020-01-01 UTC. Rerunning this script
reproduces the file byte for byte.
"""

from pathlib import Path

from walkforward.synthetic import random_walk_prices, write_prices_csv

HERE = Path(__file__).parent

series = random_walk_prices(
    n_bars=10_000,
    frequency_minutes=60,
    seed=20,
    vol=0.0035,
    regime_bars=24 * 7,
    regime_drift=0.0015,
    start_price=100.0,
    start_ms=1_577_836_800_000,  # 2020-01-01T00:00:00Z
    asset_id="SYN",
)
write_prices_csv(series, HERE / "synthetic.csv")
print(f"wrote {HERE / 'synthetic.csv'} ({len(series)} bars)")
