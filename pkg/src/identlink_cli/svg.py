"""
Static SVG density panels for posterior predictive comparisons.

One row per panel: kernel density curves of every sample series, a dotted
vertical line at each series' predictive mean and a solid line at the
observed mean.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np
from scipy import stats

from identlink.errors import DomainError

logger = logging.getLogger(__name__)

WIDTH = 640
PANEL_HEIGHT = 120
MARGIN_LEFT = 110
MARGIN_RIGHT = 20
MARGIN_TOP = 30
GRID_POINTS = 200
PALETTE = ["#1f4e9c", "#2e8b57", "#8b4513", "#6a3d9a"]
OBSERVED_COLOR = "#c0392b"


@dataclass
class Panel:
    label: str
    samples: Dict[str, np.ndarray] = field(default_factory=dict)
    observed_mean: Optional[float] = None

    @property
    def is_empty(self) -> bool:
        return all(np.asarray(s).size == 0 for s in self.samples.values())


def _density(samples: np.ndarray, grid: np.ndarray) -> Optional[np.ndarray]:
    """Gaussian KDE on the grid, or None for a sample with no spread."""
    if np.ptp(samples) == 0:
        return None
    return stats.gaussian_kde(samples)(grid)


def _x_range(panel: Panel):
    values = [np.asarray(s, dtype=np.float64) for s in panel.samples.values() if np.asarray(s).size]
    lo = min(float(v.min()) for v in values)
    hi = max(float(v.max()) for v in values)
    if panel.observed_mean is not None:
        lo, hi = min(lo, panel.observed_mean), max(hi, panel.observed_mean)
    pad = 0.1 * (hi - lo) if hi > lo else max(abs(lo) * 0.1, 0.5)
    return lo - pad, hi + pad


def _panel_svg(index: int, panel: Panel, series_colors: Dict[str, str]) -> List[str]:
    top = MARGIN_TOP + index * PANEL_HEIGHT
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = PANEL_HEIGHT - 20
    base = top + plot_h
    out = [f'<g class="panel" id="panel-{index}">']
    out.append(f'<text x="10" y="{top + plot_h / 2:.1f}" font-size="12">{escape(panel.label)}</text>')
    out.append(
        f'<line x1="{MARGIN_LEFT}" y1="{base}" x2="{WIDTH - MARGIN_RIGHT}" y2="{base}" stroke="#444" stroke-width="1"/>'
    )
    if panel.is_empty:
        out.append(
            f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{top + plot_h / 2:.1f}" font-size="12" '
            f'text-anchor="middle" fill="#888">no data</text>'
        )
        out.append("</g>")
        return out

    lo, hi = _x_range(panel)
    grid = np.linspace(lo, hi, GRID_POINTS)

    def sx(x: float) -> float:
        return MARGIN_LEFT + (x - lo) / (hi - lo) * plot_w

    curves = {}
    for name, samples in panel.samples.items():
        samples = np.asarray(samples, dtype=np.float64)
        if samples.size:
            curves[name] = (samples, _density(samples, grid))
    peak = max((float(d.max()) for _, d in curves.values() if d is not None), default=1.0)

    for name, (samples, density) in curves.items():
        color = series_colors[name]
        if density is None:
            x = sx(float(samples[0]))
            out.append(
                f'<line class="spike" x1="{x:.2f}" y1="{base}" x2="{x:.2f}" y2="{top + 4}" '
                f'stroke="{color}" stroke-width="2"/>'
            )
        else:
            points = " ".join(
                f"{sx(x):.2f},{base - d / peak * (plot_h - 8):.2f}" for x, d in zip(grid, density)
            )
            out.append(f'<polyline class="density" points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        x = sx(float(samples.mean()))
        out.append(
            f'<line class="predictive-mean" x1="{x:.2f}" y1="{base}" x2="{x:.2f}" y2="{top + 4}" '
            f'stroke="{color}" stroke-width="1" stroke-dasharray="2,3"/>'
        )
    if panel.observed_mean is not None:
        x = sx(panel.observed_mean)
        out.append(
            f'<line class="observed-mean" x1="{x:.2f}" y1="{base}" x2="{x:.2f}" y2="{top + 4}" '
            f'stroke="{OBSERVED_COLOR}" stroke-width="1.5"/>'
        )
    for x in (lo, hi):
        out.append(f'<text x="{sx(x):.2f}" y="{base + 14}" font-size="10" text-anchor="middle">{x:.3g}</text>')
    out.append("</g>")
    return out


def emit_density_svg(panels: Sequence[Panel], path, title: str = "") -> Path:
    """Write one density panel per entry of `panels` to an SVG file.

    Args:
        panels: panels in display order; a panel with no samples shows "no data"
        path: output file
        title: optional heading

    Raises:
        DomainError: a non-empty series has fewer than 2 samples
    """
    for panel in panels:
        for name, samples in panel.samples.items():
            if np.asarray(samples).size == 1:
                raise DomainError(f"panel '{panel.label}' series '{name}' needs at least 2 samples")
    names: List[str] = []
    for panel in panels:
        names.extend(n for n in panel.samples if n not in names)
    series_colors = {name: PALETTE[i % len(PALETTE)] for i, name in enumerate(names)}

    height = MARGIN_TOP + PANEL_HEIGHT * max(len(panels), 1) + 10
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">',
        f'<text x="10" y="18" font-size="14">{escape(title)}</text>',
    ]
    for i, name in enumerate(names):
        x = WIDTH - MARGIN_RIGHT - 120 * (len(names) - i)
        lines.append(f'<text x="{x}" y="18" font-size="11" fill="{series_colors[name]}">{escape(name)}</text>')
    for i, panel in enumerate(panels):
        lines.extend(_panel_svg(i, panel, series_colors))
    lines.append("</svg>")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    logger.info("Wrote %d density panels to %s", len(panels), path)
    return path
