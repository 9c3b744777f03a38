"""Run configuration: INI file parsing, CLI overrides, config hashing.

The config file is INI (configparser dialect) with four sections::

    [prices]            ; one asset per line
    BTC = data/btc_1m.csv

    [data]
    source_frequency = 1        ; bar frequency of the input files (minutes)
    frequency = 60              ; analysis bar frequency (minutes)

    [split]                     ; YYYY-MM-DD (UTC midnight) or epoch ms
    train_start = 2018-02-08
    train_end = 2019-09-01
    unseen_start = 2019-11-07
    unseen_end = 2021-08-22

    [strategy]
    cost = 0.001                ; per-leg transaction cost fraction
    fast_periods = 5,7,10,15,20,30
    slow_periods = 40,50,100,150,200
    window_days = 1,2,3,5,7,10,14,21,28
    cost_levels = 0.0005,0.0007,0.001,0.002,0.003,0.004,0.005
    final_exit = false
    rolling = false

    [run]
    seed = 0
    threads = 1
    out = out
    iterations = 1000
    top_k = 2
    alpha = 0.05
    pairs = 7:28,14:10          ; windows for unseen/bootstrap/costsweep/portfolio
    train_asset = BTC           ; asset driving grid/bootstrap/costsweep
    n_year =                    ; optional annualization override
    figures = true

Lists are comma-separated. Every value has a default except [prices] and
[split]. The config hash covers only output-affecting fields — threads, the
output directory, and the figure toggle are excluded — so reruns of the same
config and seed are byte-identical regardless of parallelism.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .analysis import DEFAULT_COST_LEVELS
from .engine import WindowPair
from .errors import ConfigError
from .indicators import DEFAULT_EMA_PERIODS, FAST_SLOW_THRESHOLD
from .optimizer import DEFAULT_WINDOW_DAYS

_DEFAULT_FAST = tuple(p for p in DEFAULT_EMA_PERIODS if p <= FAST_SLOW_THRESHOLD)
_DEFAULT_SLOW = tuple(p for p in DEFAULT_EMA_PERIODS if p > FAST_SLOW_THRESHOLD)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run settings (file values + CLI overrides)."""

    prices: tuple[tuple[str, str], ...]  # (asset_id, path) in file order
    train_start: int
    train_end: int
    unseen_start: int
    unseen_end: int
    source_frequency: int = 1
    frequency: int = 60
    cost: float = 0.001
    fast_periods: tuple[int, ...] = _DEFAULT_FAST
    slow_periods: tuple[int, ...] = _DEFAULT_SLOW
    window_days: tuple[int, ...] = DEFAULT_WINDOW_DAYS
    cost_levels: tuple[float, ...] = DEFAULT_COST_LEVELS
    final_exit: bool = False
    rolling: bool = False
    seed: int = 0
    threads: int = 1
    out: str = "out"
    iterations: int = 1000
    top_k: int = 2
    alpha: float = 0.05
    pairs: tuple[WindowPair, ...] = ()
    train_asset: str = ""
    n_year: Optional[float] = None
    figures: bool = True

    @property
    def asset_ids(self) -> tuple[str, ...]:
        return tuple(asset for asset, _ in self.prices)

    def path_for(self, asset: str) -> str:
        for asset_id, path in self.prices:
            if asset_id == asset:
                return path
        raise ConfigError(f"asset {asset!r} not in [prices] ({', '.join(self.asset_ids)})")


def _parse_epoch_ms(raw: str, key: str) -> int:
    text = raw.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        dt = datetime.strptime(text, "%Y-%m-%d").replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected YYYY-MM-DD or epoch ms, got {text!r}") from exc
    return int(dt.timestamp() * 1000)


def _parse_int_list(raw: str, key: str) -> tuple[int, ...]:
    try:
        return tuple(int(part.strip()) for part in raw.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated integers, got {raw!r}") from exc


def _parse_float_list(raw: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(part.strip()) for part in raw.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {raw!r}") from exc


def parse_pairs(raw: str) -> tuple[WindowPair, ...]:
    """Parse a window-pair list like ``7:28,14:10`` (train:test days)."""
    pairs = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        fields = part.split(":")
        if len(fields) != 2:
            raise ConfigError(f"pair {part!r} is not train:test")
        try:
            pairs.append(WindowPair(int(fields[0]), int(fields[1])))
        except ValueError as exc:
            raise ConfigError(f"pair {part!r} is not train:test integers") from exc
    return tuple(pairs)


def load_config(path) -> RunConfig:
    """Parse and validate a config file; raises ConfigError on any problem."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file {path} not found")
    if not parser.has_section("prices") or not parser.items("prices"):
        raise ConfigError("config needs a [prices] section with at least one asset")
    base = Path(path).resolve().parent
    prices = tuple(
        (asset.upper(), str((base / value).resolve()) if not Path(value).is_absolute() else value)
        for asset, value in parser.items("prices")
    )
    if not parser.has_section("split"):
        raise ConfigError("config needs a [split] section")

    def get(section: str, key: str, fallback: Optional[str] = None) -> Optional[str]:
        return parser.get(section, key, fallback=fallback)

    split_values = {}
    for key in ("train_start", "train_end", "unseen_start", "unseen_end"):
        raw = get("split", key)
        if raw is None:
            raise ConfigError(f"[split] is missing {key}")
        split_values[key] = _parse_epoch_ms(raw, key)

    try:
        cfg = RunConfig(
            prices=prices,
            **split_values,
            source_frequency=int(get("data", "source_frequency", "1")),
            frequency=int(get("data", "frequency", "60")),
            cost=float(get("strategy", "cost", "0.001")),
            fast_periods=_parse_int_list(
                get("strategy", "fast_periods", ",".join(map(str, _DEFAULT_FAST))), "fast_periods"
            ),
            slow_periods=_parse_int_list(
                get("strategy", "slow_periods", ",".join(map(str, _DEFAULT_SLOW))), "slow_periods"
            ),
            window_days=_parse_int_list(
                get("strategy", "window_days", ",".join(map(str, DEFAULT_WINDOW_DAYS))), "window_days"
            ),
            cost_levels=_parse_float_list(
                get("strategy", "cost_levels", ",".join(map(str, DEFAULT_COST_LEVELS))), "cost_levels"
            ),
            final_exit=parser.getboolean("strategy", "final_exit", fallback=False),
            rolling=parser.getboolean("strategy", "rolling", fallback=False),
            seed=int(get("run", "seed", "0")),
            threads=int(get("run", "threads", "1")),
            out=get("run", "out", "out"),
            iterations=int(get("run", "iterations", "1000")),
            top_k=int(get("run", "top_k", "2")),
            alpha=float(get("run", "alpha", "0.05")),
            pairs=parse_pairs(get("run", "pairs", "")),
            train_asset=(get("run", "train_asset", prices[0][0]) or prices[0][0]).upper(),
            n_year=(lambda raw: float(raw) if raw and raw.strip() else None)(get("run", "n_year", "")),
            figures=parser.getboolean("run", "figures", fallback=True),
        )
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if not cfg.prices:
        raise ConfigError("no price files configured")
    for asset, path in cfg.prices:
        if not Path(path).is_file():
            raise ConfigError(f"price file for {asset} does not exist: {path}")
    if not cfg.window_days:
        raise ConfigError("window set is empty")
    if not cfg.fast_periods or not cfg.slow_periods:
        raise ConfigError("EMA universe is empty")
    if any(f >= s for f in cfg.fast_periods for s in cfg.slow_periods):
        raise ConfigError("every fast period must be below every slow period")
    if not (cfg.train_start < cfg.train_end <= cfg.unseen_start < cfg.unseen_end):
        raise ConfigError("split must satisfy train_start < train_end <= unseen_start < unseen_end")
    if not (0.0 <= cfg.cost < 1.0):
        raise ConfigError(f"cost must be in [0, 1), got {cfg.cost}")
    if cfg.frequency % cfg.source_frequency != 0:
        raise ConfigError(
            f"frequency {cfg.frequency} is not a multiple of source_frequency {cfg.source_frequency}"
        )
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    if cfg.iterations < 1:
        raise ConfigError("iterations must be >= 1")
    if not (0.0 < cfg.alpha < 1.0):
        raise ConfigError("alpha must be in (0, 1)")
    if cfg.train_asset not in cfg.asset_ids:
        raise ConfigError(f"train_asset {cfg.train_asset!r} not in [prices]")


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    """Overlay parsed CLI flags onto a config (flags win)."""
    updates = {}
    if getattr(args, "freq", None) is not None:
        updates["frequency"] = args.freq
    if getattr(args, "cost", None) is not None:
        updates["cost"] = args.cost
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        updates["threads"] = args.threads
    if getattr(args, "out", None) is not None:
        updates["out"] = args.out
    if getattr(args, "pairs", None) is not None:
        updates["pairs"] = parse_pairs(args.pairs)
    if getattr(args, "iterations", None) is not None:
        updates["iterations"] = args.iterations
    if getattr(args, "no_figures", False):
        updates["figures"] = False
    if not updates:
        return cfg
    cfg = replace(cfg, **updates)
    validate_config(cfg)
    return cfg


def config_hash(cfg: RunConfig) -> str:
    """Short digest of every output-affecting setting.

    Excludes threads, the output directory, and the figure toggle: those may
    vary without changing any written value.
    """
    parts = [
        f"prices={cfg.prices!r}",
        f"split=({cfg.train_start},{cfg.train_end},{cfg.unseen_start},{cfg.unseen_end})",
        f"source_frequency={cfg.source_frequency}",
        f"frequency={cfg.frequency}",
        f"cost={cfg.cost!r}",
        f"fast={cfg.fast_periods}",
        f"slow={cfg.slow_periods}",
        f"windows={cfg.window_days}",
        f"cost_levels={cfg.cost_levels!r}",
        f"final_exit={cfg.final_exit}",
        f"rolling={cfg.rolling}",
        f"seed={cfg.seed}",
        f"iterations={cfg.iterations}",
        f"top_k={cfg.top_k}",
        f"alpha={cfg.alpha!r}",
        f"pairs={tuple(p.label for p in cfg.pairs)}",
        f"train_asset={cfg.train_asset}",
        f"n_year={cfg.n_year!r}",
    ]
    return hashlib.sha256("\n".join(parts).encode("utf-8")).hexdigest()[:12]
