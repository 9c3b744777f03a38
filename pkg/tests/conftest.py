"""Shared fixtures for the CLI tests: a small two-asset workspace."""

import pytest

from walkforward.synthetic import random_walk_prices, write_prices_csv

START_MS = 1_577_836_800_000  # 2020-01-01T00:00Z
TRAIN_DAYS = 90
UNSEEN_DAYS = 40
DAY_MS = 24 * 3_600_000


@pytest.fixture(scope="session")
def cli_workspace(tmp_path_factory):
    """Price CSVs and an INI config sized for fast end-to-end runs."""
    root = tmp_path_factory.mktemp("cli")
    n_bars = (TRAIN_DAYS + UNSEEN_DAYS) * 24
    for asset, seed in (("AAA", 11), ("BBB", 12)):
        series = random_walk_prices(
            n_bars,
            frequency_minutes=60,
            seed=seed,
            vol=0.005,
            regime_bars=36,
            regime_drift=0.002,
            start_ms=START_MS,
            asset_id=asset,
        )
        write_prices_csv(series, root / f"{asset.lower()}.csv")
    train_end = START_MS + TRAIN_DAYS * DAY_MS
    unseen_end = train_end + UNSEEN_DAYS * DAY_MS
    (root / "run.ini").write_text(
        "[prices]\n"
        "AAA = aaa.csv\n"
        "BBB = bbb.csv\n"
        "\n"
        "[data]\n"
        "source_frequency = 60\n"
        "frequency = 60\n"
        "\n"
        "[split]\n"
        f"train_start = {START_MS}\n"
        f"train_end = {train_end}\n"
        f"unseen_start = {train_end}\n"
        f"unseen_end = {unseen_end}\n"
        "\n"
        "[strategy]\n"
        "cost = 0.001\n"
        "fast_periods = 3,5\n"
        "slow_periods = 10,20\n"
        "window_days = 1,2,3\n"
        "\n"
        "[run]\n"
        "pairs = 2:1,3:2\n"
        "train_asset = AAA\n"
        "iterations = 64\n"
        "seed = 5\n",
        encoding="utf-8",
    )
    return root
