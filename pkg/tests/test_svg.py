import numpy as np
import pytest

from identlink import DomainError
from identlink_cli.svg import OBSERVED_COLOR, Panel, emit_density_svg


def test_one_group_per_panel(tmp_path):
    gen = np.random.default_rng(0)
    panels = [
        Panel("age = 1", {"lambda link": gen.gamma(4, 0.5, 300), "exp link": gen.gamma(4, 0.5, 300)}, 2.1),
        Panel("age = 2", {"lambda link": gen.gamma(5, 0.5, 300), "exp link": gen.gamma(5, 0.5, 300)}, 2.4),
    ]
    text = emit_density_svg(panels, tmp_path / "plot.svg", "Predictive").read_text()
    assert text.startswith("<svg")
    assert text.count('<g class="panel"') == 2
    assert text.count('class="density"') == 4
    assert text.count('class="predictive-mean"') == 4
    assert text.count('class="observed-mean"') == 2
    assert OBSERVED_COLOR in text


def test_constant_series_draws_a_spike(tmp_path):
    panel = Panel("flat", {"lambda link": np.full(10, 3.0)}, None)
    text = emit_density_svg([panel], tmp_path / "spike.svg").read_text()
    assert 'class="spike"' in text
    assert 'class="density"' not in text


def test_empty_panel(tmp_path):
    text = emit_density_svg([Panel("nothing", {"lambda link": np.array([])})], tmp_path / "empty.svg").read_text()
    assert "no data" in text


def test_single_sample_rejected(tmp_path):
    with pytest.raises(DomainError):
        emit_density_svg([Panel("one", {"lambda link": np.array([1.0])})], tmp_path / "bad.svg")


def test_labels_are_escaped(tmp_path):
    panel = Panel("x < 1 & y", {"s": np.array([1.0, 2.0, 3.0])})
    text = emit_density_svg([panel], tmp_path / "esc.svg").read_text()
    assert "x &lt; 1 &amp; y" in text
