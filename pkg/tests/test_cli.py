import json

import pandas as pd
import pytest
from typer.testing import CliRunner

from identlink_cli import app, cli_dispatch

runner = CliRunner()


def _invoke(*args):
    result = runner.invoke(app, list(args))
    return result, json.loads(result.stdout) if result.stdout.strip() else None


@pytest.fixture
def short_cfg(tmp_path, data_dir):
    path = tmp_path / "short.cfg"
    path.write_text(
        f"data_path = {data_dir / 'drift_design.csv'}\n"
        "prior_variance = 10\n"
        "burn_in = 200\n"
        "keep = 300\n"
        "seed = 5\n"
    )
    return path


def test_fit_writes_draws_and_summary(short_cfg, tmp_path):
    out = tmp_path / "out"
    result, payload = _invoke("fit", "--config", str(short_cfg), "--out-dir", str(out))
    assert result.exit_code == 0, result.stdout
    assert payload["success"] is True
    assert payload["n_draws"] == 300
    draws = pd.read_csv(out / "draws.csv")
    assert list(draws.columns) == ["chain", "sweep", "const", "x"]
    assert len(draws) == 300
    summary = pd.read_csv(out / "summary.csv")
    assert list(summary["parameter"]) == ["const", "x"]
    assert [row["parameter"] for row in payload["parameters"]] == ["const", "x"]


def test_fit_is_reproducible(short_cfg, tmp_path):
    _invoke("fit", "--config", str(short_cfg), "--out-dir", str(tmp_path / "a"))
    _invoke("fit", "--config", str(short_cfg), "--out-dir", str(tmp_path / "b"))
    assert (tmp_path / "a" / "draws.csv").read_text() == (tmp_path / "b" / "draws.csv").read_text()


def test_fit_exp_link_records_step_size(short_cfg, tmp_path):
    result, payload = _invoke("fit", "--config", str(short_cfg), "--out-dir", str(tmp_path), "--model", "poisson-exp")
    assert result.exit_code == 0, result.stdout
    assert "step_size" in pd.read_csv(tmp_path / "draws.csv").columns
    assert 0.0 < payload["acceptance"]["0"] < 1.0


def test_fit_multinomial(tmp_path, data_dir):
    cfg = tmp_path / "multi.cfg"
    cfg.write_text(f"model = multinomial-lambda\ndata_path = {data_dir / 'multinomial_example.csv'}\nburn_in = 50\nkeep = 100\n")
    result, payload = _invoke("fit", "--config", str(cfg), "--out-dir", str(tmp_path))
    assert result.exit_code == 0, result.stdout
    assert payload["model"] == "multinomial-lambda"


def test_predict_after_fit(short_cfg, tmp_path):
    _invoke("fit", "--config", str(short_cfg), "--out-dir", str(tmp_path))
    rows = tmp_path / "rows.csv"
    rows.write_text("const,x,exposure\n1,0.0,1\n1,0.5,2\n")
    result, payload = _invoke("predict", "--config", str(short_cfg), "--out-dir", str(tmp_path), "--rows", str(rows))
    assert result.exit_code == 0, result.stdout
    assert len(payload["rows"]) == 2
    assert all(r["q025"] <= r["mean"] <= r["q975"] for r in payload["rows"])
    assert (tmp_path / "predictive.csv").is_file()


def test_compare_writes_every_artifact(short_cfg, tmp_path):
    result, payload = _invoke("compare", "--config", str(short_cfg), "--out-dir", str(tmp_path))
    assert result.exit_code == 0, result.stdout
    for name in ("draws_lambda.csv", "draws_exp.csv", "ess_comparison.csv", "predictive.csv", "predictive.svg"):
        assert (tmp_path / name).is_file()
    assert len(payload["groups"]) == 6
    assert (tmp_path / "predictive.svg").read_text().count('<g class="panel"') == 6


def test_missing_data_is_an_error(tmp_path):
    result, payload = _invoke("fit", "--out-dir", str(tmp_path))
    assert result.exit_code == 1
    assert "no dataset" in payload["error"]


def test_parse_error_reports_location(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("y,x\n1,0.5\n2,oops\n")
    result, payload = _invoke("fit", "--data", str(bad), "--out-dir", str(tmp_path))
    assert result.exit_code == 1
    assert payload["details"] == {"row": 3, "column": "x"}


def test_missing_config_file_exits_2(tmp_path):
    result, payload = _invoke("fit", "--config", str(tmp_path / "absent.cfg"))
    assert result.exit_code == 2
    assert "Cannot access file" in payload["error"]


def test_unknown_subcommand_exits_2():
    assert cli_dispatch(["no-such-command"]) == 2


def test_dispatch_returns_command_code(short_cfg, tmp_path):
    assert cli_dispatch(["fit", "--config", str(short_cfg), "--out-dir", str(tmp_path)]) == 0
    assert cli_dispatch(["fit", "--out-dir", str(tmp_path)]) == 1


def test_validate_small_run(tmp_path):
    result, payload = _invoke(
        "validate", "--model", "poisson", "--outer", "200", "--seed", "1", "--threshold", "100", "--out-dir", str(tmp_path)
    )
    assert result.exit_code == 0, result.stdout
    assert payload["model"] == "poisson"
    assert payload["critical_z"] == 100.0
    assert (tmp_path / "gir_poisson.csv").is_file()
    assert (tmp_path / "gir_poisson.txt").is_file()


def test_drift_check(data_dir, tmp_path):
    result, payload = _invoke(
        "drift-check",
        "--config", str(data_dir / "drift.cfg"),
        "--out-dir", str(tmp_path),
        "--norms", "0,1000",
        "--directions", "2",
        "--n-mc", "500",
    )
    assert result.exit_code == 0, result.stdout
    frame = pd.read_csv(tmp_path / "drift.csv")
    assert len(frame) == 4
    assert payload["failed_points"] == 0


def test_lemma_check_writes_reports(data_dir, tmp_path):
    result, payload = _invoke(
        "lemma-check",
        "--config", str(data_dir / "drift.cfg"),
        "--out-dir", str(tmp_path),
        "--norms", "0,3",
        "--draws", "2000",
    )
    assert result.exit_code in (0, 1)
    assert payload["points"] == 2
    assert payload["bounds_tested"] == 2 * 6 * 3
    for name in ("lemma_uhat.csv", "lemma_invariance.csv", "lemma_bound.csv"):
        assert (tmp_path / name).is_file()


def test_simulate_link_curve(tmp_path):
    out = tmp_path / "curve.csv"
    result, _ = _invoke("simulate", "--kind", "link-curve", "--out", str(out), "--points", "5")
    assert result.exit_code == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["xi", "lambda", "exp"]
    assert len(frame) == 5


def test_simulate_sparrow(tmp_path):
    out = tmp_path / "sparrow.csv"
    result, payload = _invoke("simulate", "--kind", "sparrow", "--out", str(out), "--seed", "3")
    assert result.exit_code == 0
    assert payload["rows"] == 52
    assert list(pd.read_csv(out).columns) == ["y", "const", "age", "age2"]


def test_simulate_multinomial(tmp_path):
    out = tmp_path / "multi.csv"
    result, _ = _invoke("simulate", "--kind", "multinomial", "--out", str(out), "--n", "4", "--trials", "3")
    assert result.exit_code == 0
    frame = pd.read_csv(out)
    assert len(frame) == 4 * 3
    assert (frame.groupby("obs_id")["count"].sum() == 3).all()


def test_simulate_poisson_needs_design(tmp_path):
    result, payload = _invoke("simulate", "--kind", "poisson", "--out", str(tmp_path / "x.csv"), "--beta", "1,0")
    assert result.exit_code == 1
    assert "--data" in payload["error"]


def test_compare_on_sparrow_data_has_one_panel_per_age(tmp_path, data_dir):
    cfg = tmp_path / "sparrow.cfg"
    cfg.write_text(f"data_path = {data_dir / 'sparrow_synthetic.csv'}\nprior_variance = 100\nburn_in = 100\nkeep = 200\n")
    result, payload = _invoke("compare", "--config", str(cfg), "--out-dir", str(tmp_path))
    assert result.exit_code == 0, result.stdout
    assert [g["group"] for g in payload["groups"]] == [f"age = {a}" for a in range(1, 7)]
    assert (tmp_path / "predictive.svg").read_text().count('<g class="panel"') == 6
