"""Walk-forward optimization engine for EMA-crossover strategies under transaction costs.

The package is organized as a pipeline:

    data        -- minute-bar ingestion, resampling, log returns, period split
    indicators  -- exponential moving averages and crossover positions
    execution   -- transaction-cost model, net strategy returns, equity curves
    metrics     -- annualized performance statistics
    engine      -- walk-forward segmentation, per-segment optimization, runs
    optimizer   -- window-pair Sharpe grid, robust smoothing, top-k selection
    bootstrap   -- random-EMA and shuffled-block significance procedures
    analysis    -- transaction-cost sweeps and wealth-space portfolio combination
    cli         -- command-line front end writing CSV/JSON reports and figures
"""

__version__ = "0.1.0"

from .data import (
    DescriptiveStats,
    Gap,
    PeriodSplit,
    PriceSeries,
    ReturnSeries,
    bars_per_year,
    descriptive_stats,
    find_gaps,
    load_prices,
    log_returns,
    resample,
    split_periods,
)
from .indicators import (
    EmaPair,
    EmaParams,
    PositionSeries,
    build_universe,
    crossover_positions,
    ema,
)
from .execution import (
    CostModel,
    EquityCurve,
    count_transactions,
    equity_curve,
    strategy_returns,
)
from .metrics import (
    PerformanceReport,
    annualized_mean_return,
    annualized_volatility,
    full_report,
    information_ratio_mod,
    max_drawdown,
    sharpe,
    sortino,
)
from .engine import (
    WfRunResult,
    WfSegment,
    WindowPair,
    optimize_segment,
    run_walkforward,
    segment,
)
from .optimizer import (
    SharpeGrid,
    SmoothedGrid,
    build_grid,
    select_top_k,
    smooth,
)
from .bootstrap import (
    BootstrapConfig,
    BootstrapMethod,
    BootstrapResult,
    PositionBlock,
    bootstrap_random_ema,
    bootstrap_shuffled_blocks,
    extract_blocks,
    significance,
)
from .analysis import (
    CostSweep,
    PortfolioSpec,
    align_curves,
    buy_and_hold_returns,
    combine_portfolio,
    cost_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
