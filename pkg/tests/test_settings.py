from pathlib import Path

import numpy as np
import pytest

from identlink import InitKind, ModelKind, ParseError
from identlink_cli.settings import DEFAULT_OUT_DIR, RunConfig, load_run_config, parse_config_text


def test_parse_config_text():
    text = "# comment\nmodel = poisson-exp\n\nseed=3  # trailing\nprior_mean = 1, 2\n"
    assert parse_config_text(text) == {"model": "poisson-exp", "seed": "3", "prior_mean": "1, 2"}


def test_parse_config_text_reports_line():
    with pytest.raises(ParseError) as info:
        parse_config_text("seed = 1\nnot a pair\n")
    assert info.value.row == 2
    with pytest.raises(ParseError):
        parse_config_text("= 4\n")


def test_repeated_key_last_wins():
    assert parse_config_text("seed = 1\nseed = 2\n") == {"seed": "2"}


def test_parse_config_text_counts_skipped_lines():
    with pytest.raises(ParseError) as info:
        parse_config_text("seed = 1\n\n\n# note\nkeep\n")
    assert info.value.row == 5


def test_parse_config_text_unquotes_values():
    assert parse_config_text('data_path = "my data.csv"\nmodel = poisson-lambda # fit\n') == {
        "data_path": "my data.csv",
        "model": "poisson-lambda",
    }


def test_defaults(monkeypatch):
    monkeypatch.delenv("IDENTLINK_OUT_DIR", raising=False)
    cfg = load_run_config()
    assert cfg.model == ModelKind.POISSON_LAMBDA
    assert cfg.out_dir == Path(DEFAULT_OUT_DIR)
    assert cfg.init_beta == InitKind.PRIOR_DRAW
    prior = cfg.build_prior(2)
    np.testing.assert_allclose(prior.precision, np.eye(2) / 100.0)


def test_out_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("IDENTLINK_OUT_DIR", str(tmp_path))
    assert load_run_config().out_dir == tmp_path


def test_bundled_config_resolves_data(data_dir):
    cfg = load_run_config(data_dir / "sparrow.cfg")
    assert cfg.data_path == data_dir / "sparrow_synthetic.csv"
    assert (cfg.burn_in, cfg.keep, cfg.seed) == (5000, 5000, 20240601)
    np.testing.assert_allclose(cfg.build_prior(3).precision, np.eye(3) / 100.0)


def test_overrides_beat_the_file(data_dir, tmp_path):
    cfg = load_run_config(data_dir / "drift.cfg", seed=99, out_dir=tmp_path, model=None)
    assert cfg.seed == 99
    assert cfg.out_dir == tmp_path
    np.testing.assert_allclose(cfg.build_prior(2).precision, np.eye(2))


def test_invalid_values_name_the_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("keep = 0\n")
    with pytest.raises(ParseError) as info:
        load_run_config(path)
    assert info.value.column == "keep"
    path.write_text("colour = blue\n")
    with pytest.raises(ParseError) as info:
        load_run_config(path)
    assert info.value.column == "colour"


def test_one_prior_spec_only():
    with pytest.raises(ParseError):
        load_run_config(prior_precision=1.0, prior_variance=4.0)


def test_missing_data_file(tmp_path):
    with pytest.raises(ParseError):
        load_run_config(data_path=tmp_path / "absent.csv")


def test_missing_config_file(tmp_path):
    with pytest.raises(OSError):
        load_run_config(tmp_path / "absent.cfg")


def test_prior_from_matrix_file(tmp_path):
    matrix = tmp_path / "psi.csv"
    matrix.write_text("2,0.5\n0.5,1\n")
    cfg = RunConfig(prior_precision_path=matrix, prior_mean="1, -1")
    prior = cfg.build_prior(2)
    np.testing.assert_allclose(prior.precision, [[2.0, 0.5], [0.5, 1.0]])
    np.testing.assert_allclose(prior.mean, [1.0, -1.0])


def test_prior_mean_length_checked():
    with pytest.raises(ValueError):
        RunConfig(prior_mean=[0.0, 1.0, 2.0]).build_prior(2)


def test_mh_config_window(tmp_path):
    cfg = RunConfig(burn_in=20, adapt_window=50, target_accept=0.25)
    mh = cfg.mh_config()
    assert mh.adapt_window == 20
    assert mh.target_accept == 0.25


def test_init_beta_vector():
    cfg = RunConfig(init_beta="0.5, -1")
    assert cfg.sampler_config().init_beta == [0.5, -1.0]
