"""Market data ingestion, resampling, log returns, and period splitting.

Prices arrive as CSV files of minute bars (``timestamp,price`` with epoch-ms
timestamps, or OHLCV files of which only the close is used). From there the
module resamples to coarser frequencies by last-close within epoch-aligned
windows, derives log-return series, computes descriptive statistics with a
Jarque-Bera normality p-value, and splits a series into the global-training
and unseen evaluation periods.

Conventions:
    * Timestamps are integer epoch milliseconds, UTC.
    * A series at frequency ``f`` has consecutive timestamps that differ by
      exactly ``f * 60_000`` ms except across gaps, which are always an exact
      multiple of the bar step (missing bars, e.g. exchange outages).
    * Gaps are never filled; log returns are computed across them so that
      segment boundaries downstream are not silently shifted.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np
from scipy.stats import chi2

from .errors import ParseError, ValidationError

logger = logging.getLogger(__name__)

MS_PER_MINUTE = 60_000
#: Minutes in a 365-day year of continuous 24/7 trading.
MINUTES_PER_YEAR = 525_600
#: Resampling targets supported end to end.
STANDARD_FREQUENCIES = (1, 5, 10, 15, 30, 60)


def bars_per_year(frequency_minutes: int) -> float:
    """Annualization constant: bars per 365-day year of 24/7 trading.

    E.g. 8760 for 60-minute bars. The market never closes, so no trading-day
    calendar is involved.
    """
    if frequency_minutes <= 0:
        raise ValidationError(f"frequency must be positive, got {frequency_minutes}")
    return MINUTES_PER_YEAR / frequency_minutes


class Gap(NamedTuple):
    """A run of missing bars between two observed bars."""

    gap_start: int  # timestamp of the first missing bar
    gap_end: int  # timestamp of the last missing bar
    missing_bars: int


@dataclass(frozen=True)
class PriceSeries:
    """An ordered close-price series at a fixed bar frequency.

    Attributes:
        asset_id: symbol the prices belong to (e.g. ``"BTC"``).
        frequency_minutes: bar length in minutes.
        timestamps: int64 epoch-ms array, strictly increasing, consecutive
            differences an exact multiple of the bar step.
        prices: float64 array of positive close prices, same length.
    """

    asset_id: str
    frequency_minutes: int
    timestamps: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        ts = np.ascontiguousarray(self.timestamps, dtype=np.int64)
        px = np.ascontiguousarray(self.prices, dtype=np.float64)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", px)
        if self.frequency_minutes <= 0:
            raise ValidationError(f"frequency must be positive, got {self.frequency_minutes}")
        if ts.ndim != 1 or px.ndim != 1 or ts.size != px.size:
            raise ValidationError("timestamps and prices must be 1-d arrays of equal length")
        if ts.size == 0:
            raise ValidationError("empty price series")
        if not np.all(np.isfinite(px)) or np.any(px <= 0.0):
            bad = int(np.flatnonzero(~np.isfinite(px) | (px <= 0.0))[0])
            raise ValidationError(
                f"non-positive or non-finite price {px[bad]!r} at timestamp {ts[bad]}"
            )
        if ts.size > 1:
            diffs = np.diff(ts)
            if np.any(diffs == 0):
                dup = int(ts[int(np.flatnonzero(diffs == 0)[0])])
                raise ValidationError(f"duplicate timestamp {dup}")
            if np.any(diffs < 0):
                at = int(np.flatnonzero(diffs < 0)[0])
                raise ValidationError(
                    f"timestamps not sorted ascending near index {at} ({ts[at]} -> {ts[at + 1]})"
                )
            if np.any(diffs % self.step_ms != 0):
                at = int(np.flatnonzero(diffs % self.step_ms != 0)[0])
                raise ValidationError(
                    f"timestamp spacing {int(diffs[at])} ms at index {at} is not a multiple "
                    f"of the {self.frequency_minutes}-minute bar step"
                )
        ts.setflags(write=False)
        px.setflags(write=False)

    @property
    def step_ms(self) -> int:
        return self.frequency_minutes * MS_PER_MINUTE

    def __len__(self) -> int:
        return int(self.timestamps.size)


@dataclass(frozen=True)
class ReturnSeries:
    """Log returns with the timestamp of the bar on which each return realizes."""

    frequency_minutes: int
    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ts = np.ascontiguousarray(self.timestamps, dtype=np.int64)
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        if ts.ndim != 1 or vals.ndim != 1 or ts.size != vals.size:
            raise ValidationError("timestamps and values must be 1-d arrays of equal length")
        if ts.size > 1 and np.any(np.diff(ts) <= 0):
            raise ValidationError("return timestamps must be strictly increasing")
        ts.setflags(write=False)
        vals.setflags(write=False)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class PeriodSplit:
    """Boundary timestamps (epoch ms) of the training and unseen periods."""

    train_start: int
    train_end: int
    unseen_start: int
    unseen_end: int

    def __post_init__(self):
        if not (self.train_start < self.train_end <= self.unseen_start < self.unseen_end):
            raise ValidationError(
                "period split must satisfy train_start < train_end <= unseen_start < unseen_end; "
                f"got {self.train_start}, {self.train_end}, {self.unseen_start}, {self.unseen_end}"
            )


@dataclass(frozen=True)
class DescriptiveStats:
    """Moments and normality test of a raw (non-annualized) sample.

    ``skew`` and ``kurtosis`` (excess) use population moments, so the
    Jarque-Bera statistic N/6 * (S^2 + K^2/4) consumes exactly the reported
    values; ``jb_p_value`` is the asymptotic chi-square(2) tail probability.
    A zero-variance sample leaves skew/kurtosis/jb_p_value as NaN markers.
    """

    n_obs: int
    mean: float
    sd: float
    median: float
    min: float
    max: float
    range: float
    skew: float
    kurtosis: float
    jb_p_value: float


_PRICE_HEADERS = ("timestamp", "price")
_OHLCV_HEADERS = ("timestamp", "open", "high", "low", "close", "volume")


def load_prices(path, asset_id: str, frequency_minutes: int = 1) -> PriceSeries:
    """Load a CSV of price bars.

    Accepts either a ``timestamp,price`` file or a full
    ``timestamp,open,high,low,close,volume`` file, in which case only the
    close column is used. Timestamps are epoch milliseconds.

    The loader is strict: rows must already be sorted ascending, duplicate
    timestamps are an error naming the duplicate, prices must be positive,
    and timestamp spacing must be a multiple of the bar step.

    Args:
        path: CSV file path.
        asset_id: symbol recorded on the resulting series.
        frequency_minutes: bar frequency of the file (default 1-minute bars).

    Returns:
        PriceSeries at the stated frequency.
    """
    timestamps: list[int] = []
    prices: list[float] = []
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(f"cannot open price file {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty price file", line_number=1) from None
        cols = tuple(c.strip().lower() for c in header)
        if cols == _PRICE_HEADERS:
            price_col = 1
        elif cols == _OHLCV_HEADERS:
            price_col = 4  # close
        else:
            raise ParseError(
                f"unrecognized header {','.join(header)!r}; expected "
                f"{','.join(_PRICE_HEADERS)!r} or {','.join(_OHLCV_HEADERS)!r}",
                line_number=1,
            )
        n_cols = len(cols)
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue  # tolerate a trailing blank line
            if len(row) != n_cols:
                raise ParseError(
                    f"expected {n_cols} fields, got {len(row)}", line_number=line_no
                )
            try:
                ts = int(row[0])
                price = float(row[price_col])
            except ValueError as exc:
                raise ParseError(f"malformed row: {exc}", line_number=line_no) from exc
            if not math.isfinite(price) or price <= 0.0:
                raise ValidationError(f"line {line_no}: non-positive price {row[price_col]}")
            timestamps.append(ts)
            prices.append(price)
    if len(timestamps) < 2:
        raise ValidationError(f"price file {path} holds {len(timestamps)} bars; need at least 2")
    ts_arr = np.asarray(timestamps, dtype=np.int64)
    diffs = np.diff(ts_arr)
    if np.any(diffs == 0):
        dup = int(ts_arr[int(np.flatnonzero(diffs == 0)[0])])
        raise ValidationError(f"duplicate timestamp {dup} in {path}")
    if np.any(diffs < 0):
        at = int(np.flatnonzero(diffs < 0)[0])
        raise ValidationError(
            f"timestamps not sorted ascending in {path} near line {at + 2}"
        )
    series = PriceSeries(asset_id, frequency_minutes, ts_arr, np.asarray(prices))
    gaps = find_gaps(series)
    if gaps:
        missing = sum(g.missing_bars for g in gaps)
        logger.info("%s: %d gaps (%d missing bars) in %s", asset_id, len(gaps), missing, path)
    return series


def resample(series: PriceSeries, target_minutes: int) -> PriceSeries:
    """Resample to a coarser frequency by last close within aligned windows.

    Windows align to epoch boundaries of ``target_minutes``; the output bar is
    stamped with the window start and carries the last source price observed
    inside the window. Windows containing no source bar are skipped, which
    surfaces as a gap in the output (see :func:`find_gaps`).
    """
    if target_minutes <= 0 or target_minutes % series.frequency_minutes != 0:
        raise ValidationError(
            f"target frequency {target_minutes} is not a positive multiple of "
            f"source frequency {series.frequency_minutes}"
        )
    if target_minutes == series.frequency_minutes:
        return series
    step = target_minutes * MS_PER_MINUTE
    windows = series.timestamps // step
    # Last source index of each window: positions where the window id changes.
    last_idx = np.append(np.flatnonzero(np.diff(windows)), windows.size - 1)
    out = PriceSeries(
        series.asset_id,
        target_minutes,
        windows[last_idx] * step,
        series.prices[last_idx],
    )
    gaps = find_gaps(out)
    if gaps:
        logger.debug(
            "%s: resample %d->%d min left %d gaps",
            series.asset_id, series.frequency_minutes, target_minutes, len(gaps),
        )
    return out


def find_gaps(series: PriceSeries) -> list[Gap]:
    """Runs of missing bars, each reported as (first missing, last missing, count)."""
    step = series.step_ms
    diffs = np.diff(series.timestamps)
    out = []
    for i in np.flatnonzero(diffs > step):
        start = int(series.timestamps[i]) + step
        end = int(series.timestamps[i + 1]) - step
        out.append(Gap(start, end, int(diffs[i] // step) - 1))
    return out


def log_returns(series: PriceSeries) -> ReturnSeries:
    """Log returns ln(p[i+1]) - ln(p[i]), stamped with the later bar's timestamp."""
    if len(series) < 2:
        raise ValidationError(f"need at least 2 bars for returns, got {len(series)}")
    values = np.diff(np.log(series.prices))
    return ReturnSeries(series.frequency_minutes, series.timestamps[1:], values)


def descriptive_stats(sample: Union[ReturnSeries, np.ndarray, Sequence[float]]) -> DescriptiveStats:
    """Descriptive statistics of a raw sample (returns, Sharpe draws, ...).

    Args:
        sample: a ReturnSeries or a plain 1-d float array, length >= 8
            (the Jarque-Bera statistic needs usable sample moments).

    Returns:
        DescriptiveStats; for a zero-variance sample skew, kurtosis and
        jb_p_value are NaN markers and a warning is logged instead of raising,
        so batch runs survive flat segments.
    """
    x = np.asarray(sample.values if isinstance(sample, ReturnSeries) else sample, dtype=np.float64)
    n = x.size
    if n < 8:
        raise ValidationError(f"need at least 8 observations for descriptive stats, got {n}")
    mean = float(np.mean(x))
    sd = float(np.std(x, ddof=1))
    lo = float(np.min(x))
    hi = float(np.max(x))
    if sd == 0.0:
        logger.warning("zero-variance sample: skew/kurtosis/JB undefined")
        skew = kurt = jb_p = math.nan
    else:
        centered = x - mean
        m2 = float(np.mean(centered**2))
        m3 = float(np.mean(centered**3))
        m4 = float(np.mean(centered**4))
        skew = m3 / m2**1.5
        kurt = m4 / m2**2 - 3.0
        jb = n / 6.0 * (skew**2 + kurt**2 / 4.0)
        jb_p = float(chi2.sf(jb, 2))
    return DescriptiveStats(
        n_obs=n,
        mean=mean,
        sd=sd,
        median=float(np.median(x)),
        min=lo,
        max=hi,
        range=hi - lo,
        skew=skew,
        kurtosis=kurt,
        jb_p_value=jb_p,
    )


def split_periods(series: PriceSeries, split: PeriodSplit) -> tuple[PriceSeries, PriceSeries]:
    """Cut a series into the global-training and unseen sub-series.

    Sub-series are half-open: bars with ``train_start <= t < train_end`` and
    ``unseen_start <= t < unseen_end``. The unseen sub-series begins exactly at
    its first bar at-or-after ``unseen_start``, so walk-forward segmentation
    of the unseen period starts where the period starts.
    """
    ts = series.timestamps
    series_end = int(ts[-1]) + series.step_ms
    if split.train_start < int(ts[0]) or split.unseen_end > series_end:
        raise ValidationError(
            f"split bounds [{split.train_start}, {split.unseen_end}) outside series range "
            f"[{int(ts[0])}, {series_end})"
        )
    train_mask = (ts >= split.train_start) & (ts < split.train_end)
    unseen_mask = (ts >= split.unseen_start) & (ts < split.unseen_end)
    if not train_mask.any():
        raise ValidationError("empty training sub-series")
    if not unseen_mask.any():
        raise ValidationError("empty unseen sub-series")
    make = lambda mask: PriceSeries(
        series.asset_id, series.frequency_minutes, ts[mask], series.prices[mask]
    )
    return make(train_mask), make(unseen_mask)
