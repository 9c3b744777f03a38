"""End-to-end CLI runs against the shared synthetic workspace."""

import json
import math

import numpy as np
import pytest

from walkforward import cli
from walkforward.config import load_config
from walkforward.data import (
    PeriodSplit,
    descriptive_stats,
    load_prices,
    log_returns,
    resample,
    split_periods,
)
from walkforward.execution import CostModel
from walkforward.indicators import EmaPair
from walkforward.optimizer import build_grid, select_top_k, smooth
from walkforward.reporting import REPORT_COLUMNS, STATS_COLUMNS, read_csv

from conftest import TRAIN_DAYS, UNSEEN_DAYS

N_YEAR = 8760.0


def run_cli(cli_workspace, out, *argv, figures=False, config="run.ini"):
    args = [argv[0], "--config", str(cli_workspace / config), "--out", str(out)]
    args += list(argv[1:])
    if not figures:
        args.append("--no-figures")
    return cli.main(args)


def train_series(cli_workspace, asset):
    cfg = load_config(cli_workspace / "run.ini")
    source = load_prices(cfg.path_for(asset), asset, 60)
    split = PeriodSplit(cfg.train_start, cfg.train_end, cfg.unseen_start, cfg.unseen_end)
    return split_periods(resample(source, 60), split)[0]


def non_comment_bytes(path):
    return b"".join(
        line for line in path.read_bytes().splitlines(keepends=True)
        if not line.startswith(b"#")
    )


def assert_same_outputs(dir_a, dir_b, pattern):
    files_a = sorted(p.name for p in dir_a.glob(pattern))
    files_b = sorted(p.name for p in dir_b.glob(pattern))
    assert files_a == files_b and files_a
    for name in files_a:
        assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes(), name


# ---------------------------------------------------------------------------
# stats


def test_stats_outputs(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "stats") == 0
    for asset in ("AAA", "BBB"):
        header, rows = read_csv(tmp_path / f"stats_{asset}.csv")
        assert header == ["Freq Minutes", *STATS_COLUMNS]
        assert [r[0] for r in rows] == ["60"]  # source bars are hourly already
        gap_header, gap_rows = read_csv(tmp_path / f"gaps_{asset}.csv")
        assert gap_header == ["gap_start", "gap_end", "missing_bars"]
        assert gap_rows == []  # contiguous fixture


def test_stats_meta_block(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "stats") == 0
    lines = (tmp_path / "stats_AAA.csv").read_text().splitlines()
    assert lines[0].startswith("# engine_version=")
    assert lines[1].startswith("# config_hash=")
    assert lines[2] == "# seed=5"
    assert lines[3].startswith("# prng=")


def test_stats_values_match_library(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "stats") == 0
    _, rows = read_csv(tmp_path / "stats_AAA.csv")
    stats = descriptive_stats(log_returns(train_series(cli_workspace, "AAA")))
    assert int(rows[0][1]) == stats.n_obs == TRAIN_DAYS * 24 - 1
    assert float(rows[0][2]) == stats.mean
    assert float(rows[0][3]) == stats.sd
    assert float(rows[0][10]) == stats.jb_p_value


# ---------------------------------------------------------------------------
# grid


def test_grid_outputs(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "grid") == 0
    header, rows = read_csv(tmp_path / "grid_raw.csv")
    assert header == ["test_days\\train_days", "1", "2", "3"]
    assert [r[0] for r in rows] == ["1", "2", "3"]
    _, long_rows = read_csv(tmp_path / "grid_long.csv")
    assert len(long_rows) == 9
    selection = json.loads((tmp_path / "selection.json").read_text())
    assert len(selection["selection"]) == 2
    smoothed_header, _ = read_csv(tmp_path / "grid_smoothed.csv")
    assert smoothed_header == header
    assert (tmp_path / "grid_summary.csv").exists()  # 9 defined cells >= 8
    assert not list(tmp_path.glob("*.svg"))  # --no-figures


def test_grid_values_match_library(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "grid") == 0
    train = train_series(cli_workspace, "AAA")
    universe = [EmaPair.of(f, s) for f in (3, 5) for s in (10, 20)]
    grid = build_grid(train, (1, 2, 3), universe, CostModel(0.001), N_YEAR)
    _, rows = read_csv(tmp_path / "grid_raw.csv")
    for i in range(3):
        for j in range(3):
            cell = rows[i][j + 1]
            expected = grid.values[i, j]
            if math.isnan(expected):
                assert cell == ""
            else:
                assert float(cell) == expected
    selection = json.loads((tmp_path / "selection.json").read_text())
    expected_top = select_top_k(smooth(grid), 2)
    assert [(s["train_days"], s["test_days"]) for s in selection["selection"]] == [
        (p.train_days, p.test_days) for p in expected_top
    ]


def test_grid_rerun_and_threads_byte_identical(cli_workspace, tmp_path):
    out_a, out_b, out_c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert run_cli(cli_workspace, out_a, "grid") == 0
    assert run_cli(cli_workspace, out_b, "grid") == 0
    assert run_cli(cli_workspace, out_c, "grid", "--threads", "4") == 0
    assert_same_outputs(out_a, out_b, "*.csv")
    assert_same_outputs(out_a, out_b, "*.json")
    assert_same_outputs(out_a, out_c, "*.csv")
    assert_same_outputs(out_a, out_c, "*.json")


def test_grid_figures_deterministic(cli_workspace, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert run_cli(cli_workspace, out_a, "grid", figures=True) == 0
    assert run_cli(cli_workspace, out_b, "grid", figures=True) == 0
    assert (out_a / "grid_raw.svg").exists()
    assert (out_a / "grid_smoothed.svg").exists()
    assert_same_outputs(out_a, out_b, "*.svg")


# ---------------------------------------------------------------------------
# unseen


def test_unseen_lock_flow(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "unseen", figures=True) == 0
    assert (tmp_path / "unseen.lock").exists()
    report_before = (tmp_path / "unseen_report.csv").read_bytes()
    assert (tmp_path / "equity_AAA.svg").exists()
    # second run refuses and rewrites nothing
    assert run_cli(cli_workspace, tmp_path, "unseen") == 4
    assert (tmp_path / "unseen_report.csv").read_bytes() == report_before
    # explicit override reruns
    assert run_cli(cli_workspace, tmp_path, "unseen", "--override-unseen-lock") == 0


def test_unseen_report_layout(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "unseen") == 0
    header, rows = read_csv(tmp_path / "unseen_report.csv")
    assert header == ["Description", *REPORT_COLUMNS]
    assert [r[0] for r in rows] == [
        "AAA Buy and Hold",
        "AAA Train 2 Test 1",
        "AAA Train 3 Test 2",
        "BBB Buy and Hold",
        "BBB Train 2 Test 1",
        "BBB Train 3 Test 2",
    ]
    for asset in ("AAA", "BBB"):
        assert (tmp_path / f"equity_{asset}_bh.csv").exists()
        for tag in ("2-1", "3-2"):
            assert (tmp_path / f"equity_{asset}_wf_{tag}.csv").exists()
            run_doc = json.loads((tmp_path / f"run_{asset}_{tag}.json").read_text())
            assert run_doc["n_year"] == N_YEAR
            assert run_doc["n_returns"] > 0


def test_unseen_equity_consistent_with_report(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "unseen") == 0
    _, rows = read_csv(tmp_path / "unseen_report.csv")
    by_label = {r[0]: r for r in rows}
    checks = [
        ("AAA Buy and Hold", "equity_AAA_bh.csv"),
        ("AAA Train 2 Test 1", "equity_AAA_wf_2-1.csv"),
        ("BBB Train 3 Test 2", "equity_BBB_wf_3-2.csv"),
    ]
    for label, equity_name in checks:
        ann_mean = float(by_label[label][1])
        _, curve_rows = read_csv(tmp_path / equity_name)
        final = float(curve_rows[-1][1])
        n_returns = len(curve_rows) - 1  # leading zero point
        assert final == pytest.approx(ann_mean * n_returns / N_YEAR, rel=1e-9)


def test_unseen_requires_pairs(cli_workspace, tmp_path):
    body = (cli_workspace / "run.ini").read_text().replace("pairs = 2:1,3:2\n", "")
    (cli_workspace / "nopairs.ini").write_text(body)
    assert run_cli(cli_workspace, tmp_path, "unseen", config="nopairs.ini") == 2


# ---------------------------------------------------------------------------
# bootstrap


def test_bootstrap_outputs_both_methods(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "bootstrap") == 0
    for method in ("random-ema", "shuffled-blocks"):
        for tag in ("2-1", "3-2"):
            stem = f"bootstrap_{method}_AAA_{tag}"
            doc = json.loads((tmp_path / f"{stem}.json").read_text())
            assert doc["method"] == method
            assert doc["iterations"] == 64
            assert doc["n_higher"] == int(doc["n_higher"])
            assert 0.0 <= doc["significance_pct"] <= 100.0
            assert doc["significant"] in (True, False)
            assert doc["iteration_stats"]["n_obs"] == 64
            _, rows = read_csv(tmp_path / f"{stem}_sharpes.csv")
            assert len(rows) == 64
            recount = sum(
                1 for r in rows if r[1] and float(r[1]) > doc["original_sharpe"]
            )
            assert recount == doc["n_higher"]


def test_bootstrap_single_method_flag(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "bootstrap", "--method", "random-ema") == 0
    assert list(tmp_path.glob("bootstrap_shuffled-blocks_*")) == []
    assert (tmp_path / "bootstrap_random-ema_AAA_2-1.json").exists()


def test_bootstrap_seed_reproducibility(cli_workspace, tmp_path):
    out_a, out_b, out_c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    args = ("bootstrap", "--method", "shuffled-blocks", "--pairs", "2:1")
    assert run_cli(cli_workspace, out_a, *args) == 0
    assert run_cli(cli_workspace, out_b, *args) == 0
    assert run_cli(cli_workspace, out_c, *args, "--seed", "99") == 0
    assert_same_outputs(out_a, out_b, "*.csv")
    name = "bootstrap_shuffled-blocks_AAA_2-1_sharpes.csv"
    assert non_comment_bytes(out_a / name) != non_comment_bytes(out_c / name)


def test_bootstrap_iterations_override(cli_workspace, tmp_path):
    assert (
        run_cli(
            cli_workspace, tmp_path, "bootstrap",
            "--method", "random-ema", "--pairs", "2:1", "--iterations", "16",
        )
        == 0
    )
    _, rows = read_csv(tmp_path / "bootstrap_random-ema_AAA_2-1_sharpes.csv")
    assert len(rows) == 16


# ---------------------------------------------------------------------------
# costsweep


def test_costsweep_outputs(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "costsweep") == 0
    for tag in ("2-1", "3-2"):
        header, rows = read_csv(tmp_path / f"cost_sensitivity_AAA_{tag}.csv")
        assert header == ["Cost Level", *REPORT_COLUMNS]
        assert [r[0] for r in rows] == [
            "0.0005", "0.0007", "0.001", "0.002", "0.003", "0.004", "0.005",
        ]
        means = [float(r[1]) for r in rows]
        assert all(a > b for a, b in zip(means, means[1:]))
        doc = json.loads((tmp_path / f"cost_sensitivity_AAA_{tag}.json").read_text())
        assert doc["asset"] == "AAA"
        assert doc["levels"] == [0.0005, 0.0007, 0.001, 0.002, 0.003, 0.004, 0.005]
        assert doc["n_transactions"] >= 1
        assert doc["breakeven_estimate"] is None or isinstance(
            doc["breakeven_estimate"], float
        )
    assert json.loads((tmp_path / "cost_sensitivity_AAA_2-1.json").read_text())[
        "pair"
    ] == "2/1"


# ---------------------------------------------------------------------------
# portfolio


def test_portfolio_outputs(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "portfolio") == 0
    header, rows = read_csv(tmp_path / "portfolio_report.csv")
    assert header == ["Description", *REPORT_COLUMNS]
    assert [r[0] for r in rows] == [
        "Buy-and-Hold",
        "WF 2/1",
        "WF 3/2",
        "All portfolios combined",
    ]
    for slug in ("buy-and-hold", "wf-2-1", "wf-3-2", "all-portfolios-combined"):
        _, curve_rows = read_csv(tmp_path / f"portfolio_{slug}.csv")
        assert float(curve_rows[0][1]) == 0.0
        assert len(curve_rows) == UNSEEN_DAYS * 24  # leading point + 959 returns


def test_portfolio_combined_is_wealth_mean_of_components(cli_workspace, tmp_path):
    assert run_cli(cli_workspace, tmp_path, "portfolio") == 0

    def curve(slug):
        _, rows = read_csv(tmp_path / f"portfolio_{slug}.csv")
        return np.array([float(r[1]) for r in rows])

    components = [curve("buy-and-hold"), curve("wf-2-1"), curve("wf-3-2")]
    combined = curve("all-portfolios-combined")
    wealth = np.mean([np.exp(c) for c in components], axis=0)
    np.testing.assert_allclose(combined, np.log(wealth) - np.log(wealth[0]), atol=1e-12)


# ---------------------------------------------------------------------------
# exit codes and idempotence


def test_exit_code_on_config_errors(cli_workspace, tmp_path):
    assert cli.main(["stats", "--config", str(tmp_path / "none.ini")]) == 2
    assert run_cli(cli_workspace, tmp_path, "stats", "--pairs", "7-28") == 2


def test_exit_code_on_data_errors(cli_workspace, tmp_path):
    (cli_workspace / "broken.csv").write_text("timestamp,price\n0,100.0\nabc,1.0\n")
    body = (cli_workspace / "run.ini").read_text().replace(
        "AAA = aaa.csv", "AAA = broken.csv"
    )
    (cli_workspace / "broken.ini").write_text(body)
    assert run_cli(cli_workspace, tmp_path, "stats", config="broken.ini") == 3


def test_stats_rerun_byte_identical(cli_workspace, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert run_cli(cli_workspace, out_a, "stats") == 0
    assert run_cli(cli_workspace, out_b, "stats") == 0
    assert_same_outputs(out_a, out_b, "*.csv")
