"""Command-line front end: config in, delimited reports and figures out.

Subcommands:
    stats      per-frequency descriptive statistics and gap lists (training period)
    grid       walk-forward sharpe grid, neighbor smoothing, top-k window selection
    unseen     one-shot evaluation of chosen window pairs on the unseen period
    bootstrap  null distributions (random-EMA / shuffled-blocks) for chosen pairs
    costsweep  re-price a pair's walk-forward positions across cost levels
    portfolio  equal-weight wealth-space combination across assets, unseen period

Every output file carries a metadata header with the engine version, config
hash, seed, and PRNG identifier. Given the same config and seed, each command
rewrites its outputs byte-identically, whatever ``--threads`` says. The one
stateful artifact is ``unseen.lock``: the ``unseen`` command writes it after
its first successful run and later runs refuse (exit code 4) unless
``--override-unseen-lock`` is passed, so re-use of the unseen period is
always an explicit, logged act.

Exit codes: 0 success, 2 config error, 3 data error, 4 unseen-lock refusal.
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analysis import (
    PortfolioSpec,
    align_curves,
    buy_and_hold_returns,
    combine_portfolio,
    cost_sweep,
    place_on_timeline,
)
from .bootstrap import (
    BootstrapConfig,
    BootstrapMethod,
    bootstrap_random_ema,
    bootstrap_shuffled_blocks,
    significance,
)
from .config import RunConfig, apply_overrides, config_hash, load_config
from .data import (
    STANDARD_FREQUENCIES,
    PeriodSplit,
    PriceSeries,
    bars_per_year,
    descriptive_stats,
    find_gaps,
    load_prices,
    log_returns,
    resample,
    split_periods,
)
from .engine import WindowPair, run_walkforward
from .errors import ConfigError, DataError, UnseenLockError, WalkforwardError
from .execution import CostModel, count_transactions, equity_curve
from .indicators import EmaPair
from .metrics import full_report
from .optimizer import build_grid, select_top_k, smooth
from .reporting import (
    REPORT_COLUMNS,
    RunMeta,
    report_row,
    write_bootstrap_json,
    write_csv,
    write_equity_csv,
    write_gaps_csv,
    write_grid_long_csv,
    write_grid_matrix_csv,
    write_iteration_sharpes_csv,
    write_json,
    write_report_table,
    write_run_json,
    write_selection_json,
    write_stats_table,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# shared plumbing


def _plotting():
    from . import plotting  # deferred: pulls in matplotlib

    return plotting


def _split(cfg: RunConfig) -> PeriodSplit:
    return PeriodSplit(cfg.train_start, cfg.train_end, cfg.unseen_start, cfg.unseen_end)


def _universe(cfg: RunConfig) -> list[EmaPair]:
    return [EmaPair.of(f, s) for f in cfg.fast_periods for s in cfg.slow_periods]


def _cost(cfg: RunConfig) -> CostModel:
    return CostModel(cfg.cost, charge_final_exit=cfg.final_exit)


def _n_year(cfg: RunConfig) -> float:
    return cfg.n_year if cfg.n_year is not None else bars_per_year(cfg.frequency)


def _load_resampled(cfg: RunConfig, asset: str) -> PriceSeries:
    series = load_prices(cfg.path_for(asset), asset, cfg.source_frequency)
    return resample(series, cfg.frequency)


def _train_series(cfg: RunConfig, asset: str) -> PriceSeries:
    return split_periods(_load_resampled(cfg, asset), _split(cfg))[0]


def _unseen_series(cfg: RunConfig, asset: str) -> PriceSeries:
    return split_periods(_load_resampled(cfg, asset), _split(cfg))[1]


def _require_pairs(cfg: RunConfig) -> tuple[WindowPair, ...]:
    if not cfg.pairs:
        raise ConfigError(
            "this command needs explicit window pairs; set `pairs` under [run] "
            "(e.g. pairs = 7:28,14:10) or pass --pairs"
        )
    return cfg.pairs


def _slug(label: str) -> str:
    return "".join(c if c.isalnum() else "-" for c in label.lower()).strip("-")


def _pair_tag(pair: WindowPair) -> str:
    return f"{pair.train_days}-{pair.test_days}"


# ---------------------------------------------------------------------------
# commands


def cmd_stats(cfg: RunConfig, out: Path, meta: RunMeta, args) -> None:
    """Per-frequency descriptive stats of training-period returns, plus gaps."""
    split = _split(cfg)
    freqs = {f for f in STANDARD_FREQUENCIES if f >= cfg.source_frequency and f % cfg.source_frequency == 0}
    freqs.add(cfg.frequency)
    for asset in cfg.asset_ids:
        source = load_prices(cfg.path_for(asset), asset, cfg.source_frequency)
        rows = []
        for freq in sorted(freqs):
            train, _ = split_periods(resample(source, freq), split)
            rows.append(((freq,), descriptive_stats(log_returns(train))))
        write_stats_table(out / f"stats_{asset}.csv", ("Freq Minutes",), rows, meta)
        write_gaps_csv(out / f"gaps_{asset}.csv", find_gaps(source), meta)
        logger.info("%s: stats at %d frequencies -> %s", asset, len(rows), out)


def cmd_grid(cfg: RunConfig, out: Path, meta: RunMeta, args) -> None:
    """Sharpe grid over the window set, smoothed grid, and top-k selection."""
    train = _train_series(cfg, cfg.train_asset)
    grid = build_grid(
        train,
        cfg.window_days,
        _universe(cfg),
        _cost(cfg),
        _n_year(cfg),
        threads=cfg.threads,
        rolling=cfg.rolling,
    )
    smoothed = smooth(grid)
    selection = select_top_k(smoothed, cfg.top_k)
    write_grid_matrix_csv(out / "grid_raw.csv", grid, meta)
    write_grid_matrix_csv(out / "grid_smoothed.csv", smoothed, meta)
    write_grid_long_csv(out / "grid_long.csv", grid, smoothed, meta)
    write_selection_json(out / "selection.json", selection, smoothed, meta)
    defined = grid.values[np.isfinite(grid.values)]
    if defined.size >= 8:
        write_stats_table(
            out / "grid_summary.csv",
            ("Freq Minutes",),
            [((cfg.frequency,), descriptive_stats(defined))],
            meta,
        )
    else:
        logger.warning("only %d defined grid cells; grid_summary.csv skipped", defined.size)
    if cfg.figures:
        plotting = _plotting()
        plotting.save_heatmap(
            out / "grid_raw.svg",
            grid,
            f"{cfg.train_asset} {cfg.frequency}-min out-of-sample sharpe",
        )
        plotting.save_heatmap(
            out / "grid_smoothed.svg",
            smoothed,
            f"{cfg.train_asset} {cfg.frequency}-min robust (smoothed) sharpe",
        )
    logger.info(
        "grid %dx%d done; top-%d: %s",
        len(grid.test_axis), len(grid.train_axis), cfg.top_k,
        ", ".join(p.label for p in selection),
    )


def cmd_unseen(cfg: RunConfig, out: Path, meta: RunMeta, args) -> None:
    """Evaluate the chosen pairs once on the unseen period, then lock it."""
    pairs = _require_pairs(cfg)
    lock = out / "unseen.lock"
    if lock.exists() and not args.override_unseen_lock:
        raise UnseenLockError(
            f"unseen evaluation already ran ({lock} exists); the unseen period is "
            "meant to be consumed once. Pass --override-unseen-lock to rerun anyway."
        )
    universe = _universe(cfg)
    cost = _cost(cfg)
    n_year = _n_year(cfg)
    rows: list[tuple[str, object]] = []
    for asset in cfg.asset_ids:
        unseen = _unseen_series(cfg, asset)
        asset_rets = log_returns(unseen)
        bh = buy_and_hold_returns(asset_rets, cost)
        bh_curve = equity_curve(bh)
        rows.append((f"{asset} Buy and Hold", full_report(bh, n_year)))
        write_equity_csv(out / f"equity_{asset}_bh.csv", bh_curve, meta)
        curves = [("Buy and Hold", bh_curve)]
        for pair in pairs:
            run = run_walkforward(unseen, pair, universe, cost, n_year, rolling=cfg.rolling)
            label = f"{asset} Train {pair.train_days} Test {pair.test_days}"
            rows.append((label, full_report(run.wf_returns, n_year)))
            curve = equity_curve(run.wf_returns)
            curves.append((f"WF {pair.label}", curve))
            write_equity_csv(out / f"equity_{asset}_wf_{_pair_tag(pair)}.csv", curve, meta)
            write_run_json(out / f"run_{asset}_{_pair_tag(pair)}.json", run, meta)
        if cfg.figures:
            _plotting().save_equity_curves(
                out / f"equity_{asset}.svg", curves, f"{asset} unseen period"
            )
        logger.info("%s: %d strategies evaluated on the unseen period", asset, len(curves))
    write_report_table(out / "unseen_report.csv", rows, meta)
    lock.write_text(
        f"created={datetime.now(timezone.utc).isoformat(timespec='seconds')}\n"
        f"config_hash={meta.config_hash}\n"
        f"pairs={','.join(p.label for p in pairs)}\n",
        encoding="utf-8",
    )
    logger.info("unseen evaluation recorded in %s", lock)


def cmd_bootstrap(cfg: RunConfig, out: Path, meta: RunMeta, args) -> None:
    """Significance of each chosen pair on the training period."""
    pairs = _require_pairs(cfg)
    if args.method:
        methods = [BootstrapMethod(args.method)]
    else:
        methods = [BootstrapMethod.RANDOM_EMA, BootstrapMethod.SHUFFLED_BLOCKS]
    train = _train_series(cfg, cfg.train_asset)
    universe = _universe(cfg)
    cost = _cost(cfg)
    n_year = _n_year(cfg)
    for pair in pairs:
        for method in methods:
            bconf = BootstrapConfig(method, iterations=cfg.iterations, seed=cfg.seed)
            if method is BootstrapMethod.RANDOM_EMA:
                result = bootstrap_random_ema(
                    train, pair, universe, cost, n_year, bconf,
                    threads=cfg.threads, rolling=cfg.rolling,
                )
            else:
                run = run_walkforward(train, pair, universe, cost, n_year, rolling=cfg.rolling)
                result = bootstrap_shuffled_blocks(
                    run.test_asset_returns, run.positions, cost, n_year, bconf,
                    threads=cfg.threads,
                )
            significant = significance(result, cfg.alpha)
            stem = f"bootstrap_{method.value}_{cfg.train_asset}_{_pair_tag(pair)}"
            write_bootstrap_json(out / f"{stem}.json", result, cfg.alpha, significant, meta)
            write_iteration_sharpes_csv(out / f"{stem}_sharpes.csv", result, meta)
            if cfg.figures:
                _plotting().save_histogram(
                    out / f"{stem}.svg",
                    result.iteration_sharpes,
                    result.original_sharpe,
                    f"{cfg.train_asset} {pair.label}: {method.value} null",
                )
            logger.info(
                "%s %s: original sharpe %.4f, %d/%d higher (%.1f%%), significant at %g: %s",
                pair.label, method.value, result.original_sharpe,
                result.n_higher, result.iterations, result.significance_pct,
                cfg.alpha, significant,
            )


def cmd_costsweep(cfg: RunConfig, out: Path, meta: RunMeta, args) -> None:
    """Fixed-position cost sensitivity for each chosen pair (training period)."""
    pairs = _require_pairs(cfg)
    train = _train_series(cfg, cfg.train_asset)
    universe = _universe(cfg)
    n_year = _n_year(cfg)
    for pair in pairs:
        run = run_walkforward(train, pair, universe, _cost(cfg), n_year, rolling=cfg.rolling)
        sweep = cost_sweep(run.test_asset_returns, run.positions, cfg.cost_levels, n_year)
        stem = f"cost_sensitivity_{cfg.train_asset}_{_pair_tag(pair)}"
        write_csv(
            out / f"{stem}.csv",
            ("Cost Level", *REPORT_COLUMNS),
            [
                [level, *report_row("", report)[1:]]
                for level, report in zip(sweep.levels, sweep.reports)
            ],
            meta,
        )
        write_json(
            out / f"{stem}.json",
            {
                "asset": cfg.train_asset,
                "pair": pair.label,
                "levels": list(sweep.levels),
                "breakeven_estimate": sweep.breakeven_estimate,
                "n_transactions": count_transactions(run.positions),
            },
            meta,
        )
        if cfg.figures:
            _plotting().save_cost_sensitivity(
                out / f"{stem}.svg",
                sweep.levels,
                [r.ann_mean_return for r in sweep.reports],
                [r.sharpe for r in sweep.reports],
                sweep.breakeven_estimate,
                f"{cfg.train_asset} {pair.label} cost sensitivity",
            )
        logger.info("%s: breakeven estimate %r", pair.label, sweep.breakeven_estimate)


def _combine_equal(curves: Sequence) -> "object":
    aligned = align_curves(curves)
    spec = PortfolioSpec(components=tuple((str(i), c) for i, c in enumerate(aligned)))
    return combine_portfolio(spec)


def cmd_portfolio(cfg: RunConfig, out: Path, meta: RunMeta, args) -> None:
    """Equal-weight portfolios across assets on the unseen period.

    Builds one Buy-and-Hold portfolio, one walk-forward portfolio per chosen
    pair (strategy in cash outside its test windows), and the equal-weight
    combination of all of those portfolio curves.
    """
    pairs = _require_pairs(cfg)
    universe = _universe(cfg)
    cost = _cost(cfg)
    n_year = _n_year(cfg)
    bh_curves = []
    wf_curves: dict[WindowPair, list] = {pair: [] for pair in pairs}
    for asset in cfg.asset_ids:
        unseen = _unseen_series(cfg, asset)
        asset_rets = log_returns(unseen)
        bh_curves.append(equity_curve(buy_and_hold_returns(asset_rets, cost)))
        for pair in pairs:
            run = run_walkforward(unseen, pair, universe, cost, n_year, rolling=cfg.rolling)
            placed = place_on_timeline(run.wf_returns, asset_rets.timestamps)
            wf_curves[pair].append(equity_curve(placed))
    portfolios = [("Buy-and-Hold", _combine_equal(bh_curves))]
    for pair in pairs:
        portfolios.append((f"WF {pair.label}", _combine_equal(wf_curves[pair])))
    portfolios.append(("All portfolios combined", _combine_equal([c for _, c in portfolios])))
    rows = []
    for label, curve in portfolios:
        rows.append((label, full_report(np.diff(curve.values), n_year)))
        write_equity_csv(out / f"portfolio_{_slug(label)}.csv", curve, meta)
    write_report_table(out / "portfolio_report.csv", rows, meta)
    if cfg.figures:
        _plotting().save_equity_curves(
            out / "portfolio.svg", portfolios, "equal-weight portfolios, unseen period"
        )
    logger.info("%d portfolio curves written to %s", len(portfolios), out)


# ---------------------------------------------------------------------------
# parser / entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="INI config file (see README)")
    common.add_argument("--freq", type=int, help="bar frequency in minutes (override)")
    common.add_argument("--cost", type=float, help="per-leg transaction cost fraction (override)")
    common.add_argument("--seed", type=int, help="PRNG seed (override)")
    common.add_argument("--threads", type=int, help="worker thread cap (override)")
    common.add_argument("--out", help="output directory (override)")
    common.add_argument("--pairs", help="window pairs as train:test days, e.g. 7:28,14:10")
    common.add_argument("--no-figures", action="store_true", help="skip SVG figure output")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="walkforward",
        description="Walk-forward EMA-crossover optimization engine",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[common],
                       help="descriptive statistics and gap lists, training period")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("grid", parents=[common],
                       help="walk-forward sharpe grid, smoothing, top-k selection")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("unseen", parents=[common],
                       help="one-shot evaluation of chosen pairs on the unseen period")
    p.add_argument("--override-unseen-lock", action="store_true",
                   help="acknowledge re-use of the unseen period and rerun")
    p.set_defaults(func=cmd_unseen)

    p = sub.add_parser("bootstrap", parents=[common],
                       help="significance bootstraps for chosen pairs, training period")
    p.add_argument("--method", choices=[m.value for m in BootstrapMethod],
                   help="run a single procedure (default: both)")
    p.add_argument("--iterations", type=int, help="bootstrap iterations (override)")
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("costsweep", parents=[common],
                       help="cost sensitivity of chosen pairs, training period")
    p.set_defaults(func=cmd_costsweep)

    p = sub.add_parser("portfolio", parents=[common],
                       help="equal-weight cross-asset portfolios, unseen period")
    p.set_defaults(func=cmd_portfolio)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = apply_overrides(load_config(args.config), args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        meta = RunMeta(config_hash=config_hash(cfg), seed=cfg.seed)
        args.func(cfg, out, meta, args)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        return 2
    except UnseenLockError as exc:
        logger.error("%s", exc)
        return 4
    except DataError as exc:
        logger.error("data error: %s", exc)
        return 3
    except WalkforwardError as exc:
        logger.error("%s", exc)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
