"""File serialization: CSV/JSON writers with a reproducibility metadata block.

Every output file begins with the same four metadata fields — engine version,
config hash, seed, PRNG identifier — as ``#`` comment lines in CSVs and as a
``meta`` object in JSON. None of the metadata depends on wall-clock time or
thread count, so identical config + seed reproduce outputs byte for byte.

Undefined metric values (NaN markers) serialize as empty CSV fields and JSON
nulls, never as zeros. Floats use ``repr`` (shortest round-trip form).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from . import __version__
from .bootstrap import PRNG_ID, BootstrapResult
from .data import DescriptiveStats, Gap
from .engine import WfRunResult, WindowPair
from .execution import EquityCurve
from .metrics import PerformanceReport
from .optimizer import SharpeGrid, SmoothedGrid

#: Exact column names of the six-metric report tables.
REPORT_COLUMNS = (
    "Annualized Mean Return",
    "Annualized Volatility",
    "Sharpe Ratio",
    "Information Ratio**",
    "Max Drawdown",
    "Sortino Ratio",
)

STATS_COLUMNS = ("N", "Mean", "SD", "Median", "Min", "Max", "Range", "Skew", "Kurtosis", "JB P-Value")


@dataclass(frozen=True)
class RunMeta:
    """Reproducibility stamp carried by every output file."""

    config_hash: str
    seed: int
    engine_version: str = __version__
    prng: str = PRNG_ID

    def header_lines(self) -> list[str]:
        return [
            f"# engine_version={self.engine_version}",
            f"# config_hash={self.config_hash}",
            f"# seed={self.seed}",
            f"# prng={self.prng}",
        ]

    def as_dict(self) -> dict:
        return {
            "engine_version": self.engine_version,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "prng": self.prng,
        }


def fmt(value) -> str:
    """Serialize one cell; NaN markers become empty fields."""
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], meta: RunMeta) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for line in meta.header_lines():
            handle.write(line + "\n")
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(cell) for cell in row])


def write_json(path, payload: dict, meta: RunMeta) -> None:
    document = {"meta": meta.as_dict(), **payload}
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2, sort_keys=False)
        handle.write("\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Read back a metadata-stamped CSV: (header, rows), comment lines skipped."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = [row for row in csv.reader(line for line in handle if not line.startswith("#"))]
    return rows[0], rows[1:]


def report_row(label: str, report: PerformanceReport) -> list:
    return [
        label,
        report.ann_mean_return,
        report.ann_volatility,
        report.sharpe,
        report.information_ratio_mod,
        report.max_drawdown,
        report.sortino,
    ]


def write_report_table(path, rows: Sequence[tuple[str, PerformanceReport]], meta: RunMeta) -> None:
    """The six-metric table with one labeled row per strategy."""
    write_csv(
        path,
        ("Description", *REPORT_COLUMNS),
        [report_row(label, report) for label, report in rows],
        meta,
    )


def stats_row(stats: DescriptiveStats) -> list:
    return [
        stats.n_obs, stats.mean, stats.sd, stats.median, stats.min,
        stats.max, stats.range, stats.skew, stats.kurtosis, stats.jb_p_value,
    ]


def write_stats_table(
    path, key_header: Sequence[str], rows: Sequence[tuple[Sequence, DescriptiveStats]], meta: RunMeta
) -> None:
    """Descriptive-stats table; each row is (key cells, stats)."""
    header = (*key_header, *STATS_COLUMNS)
    write_csv(path, header, [[*key, *stats_row(stats)] for key, stats in rows], meta)


def write_gaps_csv(path, gaps: Sequence[Gap], meta: RunMeta) -> None:
    write_csv(path, ("gap_start", "gap_end", "missing_bars"), gaps, meta)


def write_equity_csv(path, curve: EquityCurve, meta: RunMeta) -> None:
    write_csv(
        path,
        ("timestamp", "cum_log_return"),
        zip(curve.timestamps.tolist(), curve.values.tolist()),
        meta,
    )


def write_returns_csv(path, returns, meta: RunMeta) -> None:
    write_csv(
        path,
        ("timestamp", "log_return"),
        zip(returns.timestamps.tolist(), returns.values.tolist()),
        meta,
    )


def write_positions_csv(path, positions, meta: RunMeta) -> None:
    write_csv(
        path,
        ("timestamp", "direction"),
        zip(positions.timestamps.tolist(), positions.directions.tolist()),
        meta,
    )


def write_grid_matrix_csv(path, grid: SharpeGrid, meta: RunMeta) -> None:
    """Matrix layout: first row the train axis, first column the test axis."""
    header = (r"test_days\train_days", *grid.train_axis)
    rows = [
        [test_days, *grid.values[i].tolist()]
        for i, test_days in enumerate(grid.test_axis)
    ]
    write_csv(path, header, rows, meta)


def write_grid_long_csv(path, grid: SharpeGrid, smoothed: SmoothedGrid, meta: RunMeta) -> None:
    """Long format: one row per cell, raw and smoothed sharpe side by side."""
    rows = []
    for i, test_days in enumerate(grid.test_axis):
        for j, train_days in enumerate(grid.train_axis):
            rows.append(
                [train_days, test_days, float(grid.values[i, j]), float(smoothed.values[i, j])]
            )
    write_csv(path, ("train_days", "test_days", "sharpe", "smoothed_sharpe"), rows, meta)


def write_selection_json(path, pairs: Sequence[WindowPair], smoothed: SmoothedGrid, meta: RunMeta) -> None:
    payload = {
        "selection": [
            {
                "train_days": p.train_days,
                "test_days": p.test_days,
                "smoothed_sharpe": _jsonable(smoothed.cell(p.train_days, p.test_days)),
            }
            for p in pairs
        ]
    }
    write_json(path, payload, meta)


def write_run_json(path, run: WfRunResult, meta: RunMeta) -> None:
    payload = {
        "window": {"train_days": run.window.train_days, "test_days": run.window.test_days},
        "n_year": run.n_year,
        "total_sharpe": _jsonable(run.total_sharpe),
        "n_returns": len(run.wf_returns),
        "segments": [
            {
                "index": s.index,
                "pair": s.pair.label if s.pair is not None else None,
                "train_sharpe": _jsonable(s.train_sharpe),
                "test_sharpe": _jsonable(s.test_sharpe),
            }
            for s in run.per_segment
        ],
    }
    write_json(path, payload, meta)


def write_bootstrap_json(path, result: BootstrapResult, alpha: float, significant: bool, meta: RunMeta) -> None:
    stats = result.stats
    payload = {
        "method": result.method.value,
        "seed": result.seed,
        "iterations": result.iterations,
        "original_sharpe": _jsonable(result.original_sharpe),
        "n_higher": result.n_higher,
        "significance_pct": result.significance_pct,
        "alpha": alpha,
        "significant": significant,
        "iteration_stats": None
        if stats is None
        else {
            "n_obs": stats.n_obs,
            "mean": _jsonable(stats.mean),
            "sd": _jsonable(stats.sd),
            "median": _jsonable(stats.median),
            "min": _jsonable(stats.min),
            "max": _jsonable(stats.max),
            "range": _jsonable(stats.range),
            "skew": _jsonable(stats.skew),
            "kurtosis": _jsonable(stats.kurtosis),
            "jb_p_value": _jsonable(stats.jb_p_value),
        },
    }
    write_json(path, payload, meta)


def write_iteration_sharpes_csv(path, result: BootstrapResult, meta: RunMeta) -> None:
    write_csv(
        path,
        ("iteration", "sharpe"),
        enumerate(result.iteration_sharpes.tolist()),
        meta,
    )
