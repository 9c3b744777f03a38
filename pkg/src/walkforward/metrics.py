"""Annualized performance statistics of a log-return series.

All six report metrics assume a zero risk-free rate and a zero benchmark:

    ann_mean  = mean(R) * n_year
    ann_vol   = sd(R, ddof=1) * sqrt(n_year)
    sharpe    = ann_mean / ann_vol
    mdd       = max over tau <= t of (cum[tau] - cum[t]), cum = 0-led cumsum(R)
    ir_mod    = sign(m) * m^2 / (ann_vol * mdd)     (drawdown-adjusted ratio)
    sortino   = mean(R) / downside_dev * sqrt(n_year),
                downside_dev = sqrt( (1/(N-1)) * sum_{R_t < 0} R_t^2 )

Metrics that are undefined on an input (zero volatility, zero drawdown, no
negative returns, too few observations) come back as NaN markers — never as
silent zeros or infinities — and serialize to empty fields downstream.
Drawdowns are reported in log-wealth units; ``PerformanceReport``
offers the simple-return conversion 1 - exp(-mdd) for display.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .data import ReturnSeries
from .errors import ValidationError

logger = logging.getLogger(__name__)

ReturnsLike = Union[ReturnSeries, np.ndarray]


def _values(returns: ReturnsLike) -> np.ndarray:
    if isinstance(returns, ReturnSeries):
        return returns.values
    return np.asarray(returns, dtype=np.float64)


@dataclass(frozen=True)
class PerformanceReport:
    """The six report metrics plus the constants they were computed with."""

    ann_mean_return: float
    ann_volatility: float
    sharpe: float
    information_ratio_mod: float
    max_drawdown: float
    sortino: float
    n_year: float
    n_obs: int

    @property
    def max_drawdown_simple(self) -> float:
        """Drawdown as a simple-return fraction, 1 - exp(-mdd)."""
        return 1.0 - math.exp(-self.max_drawdown)


def annualized_mean_return(returns: ReturnsLike, n_year: float) -> float:
    x = _values(returns)
    if x.size < 1:
        raise ValidationError("annualized mean needs at least 1 return")
    return float(np.mean(x)) * n_year


def annualized_volatility(returns: ReturnsLike, n_year: float) -> float:
    """Sample standard deviation (denominator N-1) scaled by sqrt(n_year)."""
    x = _values(returns)
    if x.size < 2:
        raise ValidationError("annualized volatility needs at least 2 returns")
    return float(np.std(x, ddof=1)) * math.sqrt(n_year)


def sharpe(returns: ReturnsLike, n_year: float) -> float:
    """Annualized mean over annualized volatility (risk-free rate 0).

    Zero volatility has no meaningful ratio: the result is a NaN marker (not
    +-inf) and the sign of the mean is reported in a warning.
    """
    ann_mean = annualized_mean_return(returns, n_year)
    ann_vol = annualized_volatility(returns, n_year)
    if ann_vol == 0.0:
        sign = "positive" if ann_mean > 0 else ("negative" if ann_mean < 0 else "zero")
        logger.warning("sharpe undefined: zero volatility (mean return is %s)", sign)
        return math.nan
    return ann_mean / ann_vol


def max_drawdown(returns: ReturnsLike) -> float:
    """Worst peak-to-trough loss of the 0-led cumulative log-return curve.

    Always >= 0 (in log units); 0 for a monotone non-decreasing curve.
    """
    x = _values(returns)
    cum = np.concatenate(([0.0], np.cumsum(x)))
    return float(np.max(np.maximum.accumulate(cum) - cum))


def information_ratio_mod(ann_mean: float, ann_vol: float, mdd: float) -> float:
    """Drawdown-adjusted ratio sign(m) * m^2 / (ann_vol * mdd).

    Undefined (NaN marker) when volatility or drawdown is zero.
    """
    if not (ann_vol > 0.0) or not (mdd > 0.0):
        return math.nan
    return math.copysign(ann_mean * ann_mean, ann_mean) / (ann_vol * mdd)


def sortino(returns: ReturnsLike, n_year: float) -> float:
    """Mean return over downside deviation (benchmark 0), annualized.

    The downside deviation keeps the full-sample N-1 denominator while only
    negative returns enter the sum. With no negative return in the sample the
    ratio is undefined and a NaN marker is returned.
    """
    x = _values(returns)
    if x.size < 2:
        raise ValidationError("sortino needs at least 2 returns")
    negative = x[x < 0.0]
    if negative.size == 0:
        logger.warning("sortino undefined: no negative returns in sample")
        return math.nan
    downside_dev = math.sqrt(float(np.sum(negative**2)) / (x.size - 1))
    return float(np.mean(x)) / downside_dev * math.sqrt(n_year)


def full_report(returns: ReturnsLike, n_year: float) -> PerformanceReport:
    """Assemble all six metrics; per-field NaN markers where undefined."""
    x = _values(returns)
    if x.size < 1:
        raise ValidationError("cannot build a report from an empty return series")
    ann_mean = annualized_mean_return(x, n_year)
    ann_vol = annualized_volatility(x, n_year) if x.size >= 2 else math.nan
    sharpe_ratio = sharpe(x, n_year) if x.size >= 2 else math.nan
    mdd = max_drawdown(x)
    return PerformanceReport(
        ann_mean_return=ann_mean,
        ann_volatility=ann_vol,
        sharpe=sharpe_ratio,
        information_ratio_mod=information_ratio_mod(ann_mean, ann_vol, mdd),
        max_drawdown=mdd,
        sortino=sortino(x, n_year) if x.size >= 2 else math.nan,
        n_year=n_year,
        n_obs=int(x.size),
    )
