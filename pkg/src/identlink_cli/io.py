"""
CSV readers and writers for datasets, draws, summaries and reports.

Row numbers in ParseError are file line numbers, the header being line 1.

Poisson schema: a `y` column of counts, an optional `exposure` column
(default 1.0), and every other column forms the design in header order.
Include a `const` column of ones for an intercept.

Multinomial schema (long format): `obs_id`, `category` (0 = baseline),
`count`, an optional `trials` column, and covariate columns, which are
ignored on category-0 rows.
"""

import functools
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from identlink import DrawMatrix, MultinomialData, MultinomialDesign, PoissonData
from identlink.diagnostics import BoundResult, ChainSummary, DriftReport, GirReport, KsReport
from identlink.errors import ParseError

logger = logging.getLogger(__name__)

HEADER_LINES = 1


def _line(index: int) -> int:
    return int(index) + HEADER_LINES + 1


def _read_table(path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise ParseError(f"'{path}' is empty") from e
    frame.columns = [str(c).strip() for c in frame.columns]
    if frame.empty:
        raise ParseError(f"'{path}' has a header but no data rows", row=2)
    return frame


def _numeric(frame: pd.DataFrame, column: str) -> np.ndarray:
    values = pd.to_numeric(frame[column].str.strip(), errors="coerce")
    bad = np.nonzero(values.isna().to_numpy() | ~np.isfinite(values.to_numpy(dtype=np.float64)))[0]
    if bad.size:
        cell = frame[column].iloc[bad[0]]
        raise ParseError(f"non-numeric value '{cell}'", row=_line(bad[0]), column=column)
    return values.to_numpy(dtype=np.float64)


def _counts(frame: pd.DataFrame, column: str) -> np.ndarray:
    values = _numeric(frame, column)
    bad = np.nonzero((values < 0) | (values != np.round(values)))[0]
    if bad.size:
        raise ParseError(
            f"count must be a non-negative integer, got {values[bad[0]]:g}", row=_line(bad[0]), column=column
        )
    return values.astype(np.int64)


def read_poisson_table(path) -> Tuple[PoissonData, List[str]]:
    """Read a Poisson dataset and return it with the design column names."""
    frame = _read_table(path)
    if "y" not in frame.columns:
        raise ParseError("missing required column 'y'", row=1, column="y")
    design_columns = [c for c in frame.columns if c not in ("y", "exposure")]
    if not design_columns:
        raise ParseError("no design columns besides 'y' and 'exposure'", row=1)
    counts = _counts(frame, "y")
    exposures = None
    if "exposure" in frame.columns:
        exposures = _numeric(frame, "exposure")
        bad = np.nonzero(exposures <= 0)[0]
        if bad.size:
            raise ParseError(f"exposure must be > 0, got {exposures[bad[0]]:g}", row=_line(bad[0]), column="exposure")
    design = np.column_stack([_numeric(frame, c) for c in design_columns])
    logger.info("Read %d rows and %d design columns from %s", design.shape[0], design.shape[1], path)
    return PoissonData(design, counts, exposures), design_columns


def read_poisson_csv(path) -> PoissonData:
    return read_poisson_table(path)[0]


def read_multinomial_csv(path) -> MultinomialData:
    """Read a long-format multinomial dataset.

    Observations keep the order in which their obs_id first appears. Each
    obs_id needs a category-0 row and categories 0..p_i without gaps; when a
    trials column is present it must be constant within an obs_id and equal
    the sum of its counts.
    """
    frame = _read_table(path)
    for column in ("obs_id", "category", "count"):
        if column not in frame.columns:
            raise ParseError(f"missing required column '{column}'", row=1, column=column)
    has_trials = "trials" in frame.columns
    covariate_columns = [c for c in frame.columns if c not in ("obs_id", "category", "count", "trials")]
    if not covariate_columns:
        raise ParseError("no covariate columns", row=1)

    obs_ids = frame["obs_id"].str.strip()
    categories = _counts(frame, "category")
    counts = _counts(frame, "count")
    trials = _counts(frame, "trials") if has_trials else None

    covariate_rows, obs_index, count_vectors = [], [], []
    for i, obs_id in enumerate(pd.unique(obs_ids)):
        rows = np.nonzero((obs_ids == obs_id).to_numpy())[0]
        order = rows[np.argsort(categories[rows], kind="stable")]
        cats = categories[order]
        if cats[0] != 0:
            raise ParseError(f"obs_id {obs_id} has no category-0 row", row=_line(rows[0]), column="category")
        if not np.array_equal(cats, np.arange(cats.shape[0])):
            raise ParseError(
                f"obs_id {obs_id} categories must run 0..{cats.shape[0] - 1} without repeats",
                row=_line(rows[0]),
                column="category",
            )
        if cats.shape[0] < 2:
            raise ParseError(f"obs_id {obs_id} needs at least one non-baseline category", row=_line(rows[0]))
        total = int(counts[order].sum())
        if trials is not None:
            declared = np.unique(trials[rows])
            if declared.shape[0] != 1 or int(declared[0]) != total:
                raise ParseError(
                    f"obs_id {obs_id}: counts sum to {total} but trials is {declared.tolist()}",
                    row=_line(rows[0]),
                    column="trials",
                )
        if total < 1:
            raise ParseError(f"obs_id {obs_id} has no trials", row=_line(rows[0]), column="count")
        for r in order[1:]:
            covariate_rows.append([_cell(frame, r, c) for c in covariate_columns])
            obs_index.append(i)
        count_vectors.append(counts[order])

    design = MultinomialDesign(
        covariates=np.asarray(covariate_rows, dtype=np.float64),
        obs_index=np.asarray(obs_index),
        n_obs=len(count_vectors),
    )
    logger.info("Read %d observations (%d category rows) from %s", design.n_obs, len(obs_index), path)
    return design.attach(count_vectors)


def _cell(frame: pd.DataFrame, row: int, column: str) -> float:
    raw = frame[column].iloc[row].strip()
    try:
        value = float(raw)
    except ValueError:
        value = math.nan
    if not math.isfinite(value):
        raise ParseError(f"non-numeric value '{raw}'", row=_line(row), column=column)
    return value


def write_draws(draws: DrawMatrix, path, names: Optional[Sequence[str]] = None) -> Path:
    """Write draws as CSV with chain and sweep columns; floats use 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(names) if names is not None else [f"beta_{k}" for k in range(draws.p)]
    frame = pd.DataFrame(draws.beta, columns=names)
    frame.insert(0, "sweep", draws.sweep)
    frame.insert(0, "chain", draws.chain)
    if draws.step_size is not None:
        frame["step_size"] = draws.step_size
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    logger.info("Wrote %d draws to %s", draws.n_rows, path)
    return path


def read_draws(path, model: str = "") -> DrawMatrix:
    frame = pd.read_csv(path, float_precision="round_trip")
    for column in ("chain", "sweep"):
        if column not in frame.columns:
            raise ParseError(f"missing required column '{column}'", row=1, column=column)
    beta_columns = [c for c in frame.columns if c not in ("chain", "sweep", "step_size")]
    step_size = frame["step_size"].to_numpy() if "step_size" in frame.columns else None
    return DrawMatrix(
        beta=frame[beta_columns].to_numpy(dtype=np.float64),
        chain=frame["chain"].to_numpy(),
        sweep=frame["sweep"].to_numpy(),
        model=model,
        step_size=step_size,
        metadata={"names": beta_columns},
    )


def _write_rows(rows: List[Dict[str, Any]], path: Path, title: str) -> Path:
    """CSV at path and an aligned plain-text table next to it (.txt)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(rows)
    frame.to_csv(path, index=False, float_format="%.6g", lineterminator="\n")
    text = frame.to_string(index=False, float_format=lambda v: f"{v:.4g}") if rows else "(no rows)"
    path.with_suffix(".txt").write_text(f"{title}\n\n{text}\n")
    logger.info("Wrote %s", path)
    return path


def write_summary(summary: ChainSummary, path, names: Optional[Sequence[str]] = None) -> Path:
    rows = summary.rows()
    if names is not None:
        for row, name in zip(rows, names):
            row["parameter"] = name
    return _write_rows(rows, path, f"Posterior summary ({summary.n_draws} draws)")


@functools.singledispatch
def report_rows(report) -> List[Dict[str, Any]]:
    """Flatten a diagnostics report into table rows."""
    if isinstance(report, list) and all(isinstance(r, dict) for r in report):
        return report
    raise TypeError(f"cannot tabulate {type(report).__name__}")


@report_rows.register
def _(report: GirReport) -> List[Dict[str, Any]]:
    return [
        {
            "function": r.name,
            "marginal_mean": r.marginal_mean,
            "successive_mean": r.successive_mean,
            "marginal_se": r.marginal_se,
            "successive_se": r.successive_se,
            "z": r.z,
            "passed": abs(r.z) <= report.critical_z,
        }
        for r in report.rows
    ]


@report_rows.register
def _(report: KsReport) -> List[Dict[str, Any]]:
    return [
        {
            "obs_index": r.obs_index,
            "y": r.y,
            "comparison": r.comparison,
            "ks": r.statistic,
            "p_value": r.p_value,
            "critical": r.critical,
            "passed": r.passed,
        }
        for r in report.rows
    ]


@report_rows.register
def _(report: DriftReport) -> List[Dict[str, Any]]:
    return [
        {
            "norm": p.norm,
            "direction": p.direction,
            "V": p.energy,
            "PV": p.pv,
            "se": p.se,
            "ratio": p.ratio,
            "ratio_se": p.ratio_se,
            "error": p.error or "",
        }
        for p in report.points
    ]


@report_rows.register
def _(report: BoundResult) -> List[Dict[str, Any]]:
    return [
        {
            "obs_index": report.obs_index,
            "h": report.h.value,
            "lhs": report.lhs,
            "se": report.se,
            "rhs": report.rhs,
            "holds": report.holds,
        }
    ]


def write_report(report, path, title: str = "") -> Path:
    """Write any diagnostics report (or list of them, or list of row dicts) as CSV and text."""
    if isinstance(report, list) and report and not isinstance(report[0], dict):
        rows = [row for item in report for row in report_rows(item)]
    else:
        rows = report_rows(report)
    return _write_rows(rows, path, title or type(report).__name__)
