"""Significance procedures: random-EMA and shuffled-block bootstraps.

Both procedures build a null distribution of walk-forward sharpes and count
how many random strategies beat the original (strict inequality):

* Random-EMA: rerun the walk-forward, but replace the per-segment argmax with
  a uniformly random EMA pair per segment. Each draw comes from its own
  deterministic stream keyed by ``[seed, iteration, segment]``.
* Shuffled blocks: cut the original concatenated test positions into maximal
  constant-direction blocks, permute the block order (Fisher-Yates, stream
  keyed by ``[seed, iteration]``), expand back to a full direction vector,
  and re-price it against the original asset returns with costs recomputed
  on the shuffled sequence — adjacent same-direction blocks merge and incur
  no reversal cost.

The shuffled-blocks original sharpe is recomputed by pricing the *unshuffled*
position sequence through the same continuous evaluation, so the identity
permutation reproduces it exactly. It can differ in the last digits from the
walk-forward run's total sharpe, which charges an entry per test window
instead of pricing one continuous sequence.

Determinism: (seed, config) fully determine both bootstraps bitwise; each
iteration derives its own stream, so results are identical for any thread
count or schedule. The generator is numpy PCG64 (``default_rng`` seeded with
the key list), recorded in output metadata as the PRNG identifier.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .data import DescriptiveStats, ReturnSeries, bars_per_year, descriptive_stats
from .engine import WindowPair, _sharpe_scalar, _Universe, segment, run_walkforward
from .errors import ValidationError
from .execution import CostModel, _net_values
from .indicators import EmaPair, PositionSeries

logger = logging.getLogger(__name__)

#: PRNG identifier recorded in output metadata.
PRNG_ID = "numpy-pcg64(default_rng; streams keyed [seed,iteration] or [seed,iteration,segment])"


class BootstrapMethod(Enum):
    RANDOM_EMA = "random-ema"
    SHUFFLED_BLOCKS = "shuffled-blocks"


@dataclass(frozen=True)
class BootstrapConfig:
    """Iteration count, seed, and procedure selector."""

    method: BootstrapMethod
    iterations: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError(f"iterations must be >= 1, got {self.iterations}")


class PositionBlock(NamedTuple):
    """A maximal run of constant direction."""

    direction: int
    length: int


@dataclass(frozen=True)
class BootstrapResult:
    """Null distribution summary against the original strategy's sharpe."""

    method: BootstrapMethod
    seed: int
    iterations: int
    original_sharpe: float
    iteration_sharpes: np.ndarray
    n_higher: int
    significance_pct: float
    stats: Optional[DescriptiveStats]

    @classmethod
    def from_sharpes(
        cls,
        method: BootstrapMethod,
        seed: int,
        original_sharpe: float,
        iteration_sharpes: np.ndarray,
    ) -> "BootstrapResult":
        sharpes = np.ascontiguousarray(iteration_sharpes, dtype=np.float64)
        sharpes.setflags(write=False)
        n = int(sharpes.size)
        n_higher = int(np.count_nonzero(sharpes > original_sharpe))
        return cls(
            method=method,
            seed=seed,
            iterations=n,
            original_sharpe=original_sharpe,
            iteration_sharpes=sharpes,
            n_higher=n_higher,
            significance_pct=100.0 * n_higher / n,
            stats=descriptive_stats(sharpes) if n >= 8 else None,
        )


def significance(result: BootstrapResult, alpha: float) -> bool:
    """True when the original beats at least a (1 - alpha) share of the null.

    Strict counting: iterations tied with the original do not count as higher.
    """
    if not (0.0 < alpha < 1.0):
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    return result.significance_pct / 100.0 < alpha


def _map_iterations(fn, iterations: int, threads: int) -> np.ndarray:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sharpes = list(pool.map(fn, range(iterations)))
    else:
        sharpes = [fn(i) for i in range(iterations)]
    return np.asarray(sharpes, dtype=np.float64)


def bootstrap_random_ema(
    series,
    window: WindowPair,
    ema_universe: Sequence[EmaPair],
    cost: CostModel,
    n_year: Optional[float] = None,
    config: BootstrapConfig = None,
    *,
    threads: int = 1,
    rolling: bool = False,
) -> BootstrapResult:
    """Null distribution from uniformly random per-segment EMA choices.

    The original walk-forward run (argmax selection) provides the sharpe to
    beat. Every iteration replays the same segments but draws the segment's
    EMA pair uniformly from the universe via ``default_rng([seed, iteration,
    segment_index])``; segments invalid in the original run stay skipped.
    """
    if config is None or config.method is not BootstrapMethod.RANDOM_EMA:
        raise ValidationError("bootstrap_random_ema requires a config with method RANDOM_EMA")
    original = run_walkforward(series, window, ema_universe, cost, n_year, rolling=rolling)
    n_year = original.n_year
    uni = _Universe(ema_universe)
    n_pairs = len(uni.pairs)
    all_rets = np.diff(np.log(series.prices))
    # Precompute every pair's net test returns per valid segment; an iteration
    # then just picks one row per segment. Identical arithmetic to the engine.
    seg_indices: list[int] = []
    seg_nets: list[np.ndarray] = []
    for result, seg in zip(original.per_segment, segment(series, window, rolling=rolling)):
        if not result.valid:
            continue
        prices_seg = series.prices[seg.start : seg.stop]
        rets_seg = all_rets[seg.start : seg.stop - 1]
        train_bars = seg.split - seg.start
        dirs = uni.directions(prices_seg)
        seg_nets.append(_net_values(dirs[:, train_bars:-1], rets_seg[train_bars:], cost))
        seg_indices.append(result.index)

    def one(iteration: int) -> float:
        parts = [
            net[np.random.default_rng([config.seed, iteration, k]).integers(n_pairs)]
            for k, net in zip(seg_indices, seg_nets)
        ]
        return _sharpe_scalar(np.concatenate(parts), n_year)

    sharpes = _map_iterations(one, config.iterations, threads)
    return BootstrapResult.from_sharpes(
        BootstrapMethod.RANDOM_EMA, config.seed, original.total_sharpe, sharpes
    )


def extract_blocks(positions: Union[PositionSeries, np.ndarray]) -> list[PositionBlock]:
    """Maximal constant-direction runs, in order."""
    dirs = positions.directions if isinstance(positions, PositionSeries) else np.asarray(positions)
    if dirs.size == 0:
        raise ValidationError("cannot extract blocks from empty positions")
    bounds = np.flatnonzero(np.diff(dirs)) + 1
    starts = np.concatenate(([0], bounds))
    ends = np.concatenate((bounds, [dirs.size]))
    return [PositionBlock(int(dirs[s]), int(e - s)) for s, e in zip(starts, ends)]


def shuffled_iteration_positions(
    original_positions: Union[PositionSeries, np.ndarray],
    config: BootstrapConfig,
    iteration: int,
) -> np.ndarray:
    """The expanded direction vector of one shuffled-blocks iteration.

    Exposed so the conservation invariants (bar counts, block-length
    multiset) can be audited per iteration from outside.
    """
    blocks = extract_blocks(original_positions)
    block_dirs = np.asarray([b.direction for b in blocks], dtype=np.int8)
    block_lens = np.asarray([b.length for b in blocks])
    perm = np.random.default_rng([config.seed, iteration]).permutation(block_dirs.size)
    return np.repeat(block_dirs[perm], block_lens[perm])


def bootstrap_shuffled_blocks(
    asset_returns: ReturnSeries,
    original_positions: PositionSeries,
    cost: CostModel,
    n_year: Optional[float] = None,
    config: BootstrapConfig = None,
    *,
    threads: int = 1,
) -> BootstrapResult:
    """Null distribution from permuting the strategy's position blocks.

    Each iteration shuffles the block order, expands to a direction per bar,
    matches directions positionally against the original asset returns, and
    re-prices with the cost model. Total bars, long/short bar counts, and the
    block-length multiset are conserved by construction.
    """
    if config is None or config.method is not BootstrapMethod.SHUFFLED_BLOCKS:
        raise ValidationError(
            "bootstrap_shuffled_blocks requires a config with method SHUFFLED_BLOCKS"
        )
    if len(original_positions) != len(asset_returns):
        raise ValidationError(
            f"positions ({len(original_positions)}) and returns ({len(asset_returns)}) "
            "lengths differ"
        )
    if n_year is None:
        n_year = bars_per_year(asset_returns.frequency_minutes)
    rets = asset_returns.values
    blocks = extract_blocks(original_positions)
    block_dirs = np.asarray([b.direction for b in blocks], dtype=np.int8)
    block_lens = np.asarray([b.length for b in blocks])
    if block_dirs.size == 1:
        logger.warning("single position block: every permutation reproduces the original")
    original_sharpe = _sharpe_scalar(
        _net_values(original_positions.directions, rets, cost), n_year
    )

    def one(iteration: int) -> float:
        perm = np.random.default_rng([config.seed, iteration]).permutation(block_dirs.size)
        expanded = np.repeat(block_dirs[perm], block_lens[perm])
        return _sharpe_scalar(_net_values(expanded, rets, cost), n_year)

    sharpes = _map_iterations(one, config.iterations, threads)
    return BootstrapResult.from_sharpes(
        BootstrapMethod.SHUFFLED_BLOCKS, config.seed, original_sharpe, sharpes
    )
