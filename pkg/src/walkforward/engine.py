"""Walk-forward segmentation, per-segment EMA-pair optimization, and runs.

A window pair (train_days, test_days) tiles the series into consecutive
non-overlapping segments of ``(train_days + test_days) * bars_per_day`` bars;
a trailing partial segment is dropped. Within each segment every EMA pair in
the universe is scored on the train slice (net of costs) and the best pair —
ties broken toward the smaller fast, then smaller slow period — is evaluated
on the test slice. Only test-slice returns are concatenated into the run's
out-of-sample return series.

EMAs are computed once over the whole segment and sliced, so the test-slice
signal is seeded from the segment (train) start; EMA state never carries
across segment boundaries. The position decided at bar t earns the return
over (t, t+1], which keeps the pipeline free of look-ahead: nothing computed
for segment k depends on any price after segment k's last bar.

The default stride equals the full segment length (train + test), so test
windows are separated by the next segment's train window. A conventional
rolling mode (stride = test) is available behind the ``rolling`` flag.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .data import PriceSeries, ReturnSeries, bars_per_year
from .errors import EngineError, SegmentError, ValidationError
from .execution import CostModel, _net_values
from .indicators import EmaPair, PositionSeries, ema_matrix
from . import metrics

logger = logging.getLogger(__name__)

MINUTES_PER_DAY = 1440


def bars_per_day(frequency_minutes: int) -> int:
    """Bars in one calendar UTC day of continuous trading."""
    if frequency_minutes <= 0 or MINUTES_PER_DAY % frequency_minutes != 0:
        raise ValidationError(
            f"frequency {frequency_minutes} min does not divide a {MINUTES_PER_DAY}-minute day"
        )
    return MINUTES_PER_DAY // frequency_minutes


@dataclass(frozen=True)
class WindowPair:
    """Walk-forward window geometry in days."""

    train_days: int
    test_days: int

    def __post_init__(self):
        if self.train_days < 1 or self.test_days < 1:
            raise ValidationError(
                f"window days must be positive, got ({self.train_days}, {self.test_days})"
            )

    @property
    def label(self) -> str:
        return f"{self.train_days}/{self.test_days}"


@dataclass(frozen=True)
class WfSegment:
    """Index geometry of one segment: [start, split) train, [split, stop) test."""

    start: int
    split: int
    stop: int

    def __post_init__(self):
        if not (0 <= self.start < self.split < self.stop):
            raise ValidationError(f"bad segment bounds ({self.start}, {self.split}, {self.stop})")

    @property
    def train_slice(self) -> slice:
        return slice(self.start, self.split)

    @property
    def test_slice(self) -> slice:
        return slice(self.split, self.stop)


@dataclass(frozen=True)
class SegmentResult:
    """Outcome of one segment; ``pair`` is None when no pair had a defined sharpe."""

    index: int
    pair: Optional[EmaPair]
    train_sharpe: float
    test_sharpe: float

    @property
    def valid(self) -> bool:
        return self.pair is not None


@dataclass(frozen=True)
class WfRunResult:
    """A full walk-forward run for one window pair.

    ``wf_returns`` concatenates net test-slice returns across segments;
    ``positions`` and ``test_asset_returns`` are the matching concatenated
    direction and asset-return series (equal length, shared order), which the
    bootstrap and cost-sweep procedures consume.
    """

    window: WindowPair
    per_segment: tuple[SegmentResult, ...]
    wf_returns: ReturnSeries
    total_sharpe: float
    positions: PositionSeries
    test_asset_returns: ReturnSeries
    n_year: float


class _Universe:
    """Pre-sorted EMA universe with index maps into a shared period matrix."""

    def __init__(self, pairs: Sequence[EmaPair]):
        if not pairs:
            raise ValidationError("EMA universe is empty")
        ordered = sorted(set(pairs), key=lambda p: (p.fast.n, p.slow.n))
        self.pairs: tuple[EmaPair, ...] = tuple(ordered)
        self.periods: tuple[int, ...] = tuple(sorted({n for p in ordered for n in (p.fast.n, p.slow.n)}))
        index = {n: i for i, n in enumerate(self.periods)}
        self.fast_idx = np.array([index[p.fast.n] for p in ordered])
        self.slow_idx = np.array([index[p.slow.n] for p in ordered])

    def directions(self, prices_seg: np.ndarray) -> np.ndarray:
        """Position matrix (n_pairs, n_bars) for one segment's prices."""
        emas = ema_matrix(prices_seg, self.periods)
        return np.where(emas[self.fast_idx] >= emas[self.slow_idx], 1, -1).astype(np.int8)


def _sharpe_rows(net: np.ndarray, n_year: float) -> np.ndarray:
    """Vectorized sharpe over rows; NaN marker where volatility is zero."""
    ann_mean = net.mean(axis=-1) * n_year
    ann_vol = net.std(axis=-1, ddof=1) * math.sqrt(n_year)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = ann_mean / ann_vol
    return np.where(ann_vol == 0.0, np.nan, out)


def _sharpe_scalar(net: np.ndarray, n_year: float) -> float:
    """metrics.sharpe without the zero-vol warning, for per-segment bookkeeping."""
    ann_mean = float(np.mean(net)) * n_year
    ann_vol = float(np.std(net, ddof=1)) * math.sqrt(n_year)
    if ann_vol == 0.0:
        return math.nan
    return ann_mean / ann_vol


def _train_sharpes(
    dirs: np.ndarray, rets_seg: np.ndarray, train_bars: int, cost: CostModel, n_year: float
) -> np.ndarray:
    """Per-pair train-slice sharpe for one segment's direction matrix."""
    net = _net_values(dirs[:, : train_bars - 1], rets_seg[: train_bars - 1], cost)
    return _sharpe_rows(net, n_year)


def segment(series: PriceSeries, window: WindowPair, *, rolling: bool = False) -> list[WfSegment]:
    """Tile the series into walk-forward segments.

    Args:
        series: price series to segment.
        window: (train_days, test_days) geometry.
        rolling: advance by the test window only (stride = test) instead of
            the default non-overlapping tiling (stride = train + test).

    Returns:
        Segments in order; a trailing partial segment is dropped.
    """
    bpd = bars_per_day(series.frequency_minutes)
    train_bars = window.train_days * bpd
    test_bars = window.test_days * bpd
    seg_len = train_bars + test_bars
    n = len(series)
    if n < seg_len:
        raise EngineError(
            f"series of {n} bars is shorter than one {window.label}-day segment "
            f"({seg_len} bars at {series.frequency_minutes}-minute frequency)"
        )
    stride = test_bars if rolling else seg_len
    out = []
    start = 0
    while start + seg_len <= n:
        out.append(WfSegment(start, start + train_bars, start + seg_len))
        start += stride
    return out


def optimize_segment(
    series: PriceSeries,
    seg: WfSegment,
    ema_universe: Sequence[EmaPair],
    cost: CostModel,
    n_year: Optional[float] = None,
) -> tuple[EmaPair, float]:
    """Best EMA pair on the segment's train slice by net sharpe.

    Ties break toward the smaller fast period, then the smaller slow period.
    The annualization constant only rescales every candidate identically, so
    it cannot change the argmax; it defaults to the series' own frequency
    constant for a meaningful reported sharpe.
    """
    if n_year is None:
        n_year = bars_per_year(series.frequency_minutes)
    uni = _Universe(ema_universe)
    prices_seg = series.prices[seg.start : seg.stop]
    rets_seg = np.diff(np.log(prices_seg))
    dirs = uni.directions(prices_seg)
    tsh = _train_sharpes(dirs, rets_seg, seg.split - seg.start, cost, n_year)
    if np.all(np.isnan(tsh)):
        raise SegmentError(
            f"no EMA pair has a defined train sharpe on segment [{seg.start}, {seg.stop})"
        )
    best = int(np.nanargmax(tsh))
    return uni.pairs[best], float(tsh[best])


def run_walkforward(
    series: PriceSeries,
    window: WindowPair,
    ema_universe: Sequence[EmaPair],
    cost: CostModel,
    n_year: Optional[float] = None,
    *,
    rolling: bool = False,
) -> WfRunResult:
    """One walk-forward run: optimize per segment, evaluate out of sample.

    Each test slice is an independent evaluation window: its first bar is
    charged the initial entry, reversals within it cost two legs, and its net
    returns are appended to the run's concatenated out-of-sample series. A
    segment on which no pair has a defined train sharpe is flagged invalid
    and skipped; a run with zero valid segments raises EngineError.
    """
    if n_year is None:
        n_year = bars_per_year(series.frequency_minutes)
    segs = segment(series, window, rolling=rolling)
    uni = _Universe(ema_universe)
    all_rets = np.diff(np.log(series.prices))
    ts = series.timestamps
    per_segment: list[SegmentResult] = []
    net_parts, pos_parts, asset_parts = [], [], []
    ret_ts_parts, pos_ts_parts = [], []
    for k, seg in enumerate(segs):
        prices_seg = series.prices[seg.start : seg.stop]
        rets_seg = all_rets[seg.start : seg.stop - 1]
        train_bars = seg.split - seg.start
        dirs = uni.directions(prices_seg)
        tsh = _train_sharpes(dirs, rets_seg, train_bars, cost, n_year)
        if np.all(np.isnan(tsh)):
            logger.warning("window %s segment %d: no defined train sharpe; segment skipped",
                           window.label, k)
            per_segment.append(SegmentResult(k, None, math.nan, math.nan))
            continue
        best = int(np.nanargmax(tsh))
        test_dirs = dirs[best, train_bars:-1]
        test_rets = rets_seg[train_bars:]
        net = _net_values(test_dirs, test_rets, cost)
        per_segment.append(
            SegmentResult(k, uni.pairs[best], float(tsh[best]), _sharpe_scalar(net, n_year))
        )
        net_parts.append(net)
        pos_parts.append(test_dirs)
        asset_parts.append(test_rets)
        ret_ts_parts.append(ts[seg.split + 1 : seg.stop])
        pos_ts_parts.append(ts[seg.split : seg.stop - 1])
    if not net_parts:
        raise EngineError(f"window {window.label}: no valid segments")
    wf_ts = np.concatenate(ret_ts_parts)
    wf_values = np.concatenate(net_parts)
    freq = series.frequency_minutes
    return WfRunResult(
        window=window,
        per_segment=tuple(per_segment),
        wf_returns=ReturnSeries(freq, wf_ts, wf_values),
        total_sharpe=metrics.sharpe(wf_values, n_year),
        positions=PositionSeries(np.concatenate(pos_ts_parts), np.concatenate(pos_parts)),
        test_asset_returns=ReturnSeries(freq, wf_ts, np.concatenate(asset_parts)),
        n_year=n_year,
    )
