"""
Commands that run samplers: fit, predict, compare and simulate.
"""

import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import typer

from identlink import (
    GaussianPrior,
    ModelKind,
    PoissonData,
    RngStream,
    link_curve,
    posterior_predictive_mean,
    run_chains,
    run_mh_chain,
    run_multinomial_chains,
)
from identlink.diagnostics import summarize
from identlink.errors import DomainError, ParseError
from identlink.multinomial_model import MultinomialDesign, simulate_counts as simulate_multinomial
from identlink.poisson_model import simulate_counts

from .io import read_draws, read_multinomial_csv, read_poisson_table, write_draws, write_report, write_summary
from .options import ConfigOption, DataOption, ModelOption, OutDirOption, SeedOption, parse_vector, require_data
from .results import reported
from .settings import RunConfig, load_run_config
from .svg import Panel, emit_density_svg

logger = logging.getLogger(__name__)

SPARROW_AGE_COUNTS = (10, 9, 9, 16, 7, 1)
SPARROW_BETA = (-0.07, 1.585, -0.275)


class SimulateKind(str, Enum):
    POISSON = "poisson"
    SPARROW = "sparrow"
    MULTINOMIAL = "multinomial"
    LINK_CURVE = "link-curve"


def _fit_model(cfg: RunConfig):
    """Run the configured model; returns (draws, prior, parameter names)."""
    path = require_data(cfg)
    if cfg.model == ModelKind.MULTINOMIAL_LAMBDA:
        data = read_multinomial_csv(path)
        prior = cfg.build_prior(data.p)
        return run_multinomial_chains(data, prior, cfg.sampler_config()), prior, None
    data, names = read_poisson_table(path)
    prior = cfg.build_prior(data.p)
    if cfg.model == ModelKind.POISSON_EXP:
        return run_mh_chain(data, prior, cfg.mh_config()), prior, names
    return run_chains(data, prior, cfg.sampler_config()), prior, names


def _summary_payload(summary, names) -> List[Dict[str, Any]]:
    rows = summary.rows()
    if names is not None:
        for row, name in zip(rows, names):
            row["parameter"] = name
    return rows


def _distinct_rows(data: PoissonData, names: List[str]):
    """Group observations by covariate row; label each group by its first varying column."""
    frame = pd.DataFrame(data.design, columns=names)
    varying = [c for c in names if frame[c].nunique() > 1]
    keys = [tuple(row) for row in data.design]
    groups = []
    for key in dict.fromkeys(keys):
        members = np.array([i for i, k in enumerate(keys) if k == key])
        row = data.design[members[0]]
        label = f"{varying[0]} = {row[names.index(varying[0])]:g}" if varying else f"row {members[0]}"
        groups.append((label, row, members))
    return groups


def register_sampling_commands(app: typer.Typer):
    """Register the sampler commands with the Typer app."""

    @app.command()
    @reported
    def fit(
        config: Optional[Path] = ConfigOption,
        seed: Optional[int] = SeedOption,
        out_dir: Optional[Path] = OutDirOption,
        model: Optional[ModelKind] = ModelOption,
        data: Optional[Path] = DataOption,
    ) -> Dict[str, Any]:
        """Run the configured model and write draws.csv and summary.csv."""
        cfg = load_run_config(config, seed=seed, out_dir=out_dir, model=model, data_path=data)
        draws, _, names = _fit_model(cfg)
        draws_path = write_draws(draws, cfg.out_dir / "draws.csv", names)
        summary = summarize(draws)
        summary_path = write_summary(summary, cfg.out_dir / "summary.csv", names)
        return {
            "success": True,
            "model": draws.model,
            "draws": draws_path,
            "summary": summary_path,
            "n_draws": draws.n_rows,
            "acceptance": draws.acceptance,
            "parameters": _summary_payload(summary, names),
        }

    @app.command()
    @reported
    def predict(
        rows: Path = typer.Option(..., "--rows", help="CSV of new covariate rows, optional exposure column"),
        config: Optional[Path] = ConfigOption,
        draws_path: Optional[Path] = typer.Option(None, "--draws", help="Draws file (default: <out-dir>/draws.csv)"),
        out_dir: Optional[Path] = OutDirOption,
        model: Optional[ModelKind] = ModelOption,
    ) -> Dict[str, Any]:
        """Posterior predictive means n* g(x*^T beta) at new covariate rows."""
        cfg = load_run_config(config, out_dir=out_dir, model=model)
        if cfg.model == ModelKind.MULTINOMIAL_LAMBDA:
            raise DomainError("predict supports the Poisson models only")
        draws = read_draws(draws_path or cfg.out_dir / "draws.csv", model=cfg.model.value)
        frame = pd.read_csv(rows)
        exposure = frame.pop("exposure").to_numpy(dtype=np.float64) if "exposure" in frame else np.ones(len(frame))
        frame = frame.drop(columns=[c for c in ("y",) if c in frame])
        if frame.shape[1] != draws.p:
            raise ParseError(f"expected {draws.p} covariate columns, got {frame.shape[1]}", row=1)
        link_name = "exp" if cfg.model == ModelKind.POISSON_EXP else "lambda"
        table = []
        for i, x in enumerate(frame.to_numpy(dtype=np.float64)):
            result = posterior_predictive_mean(draws, x, float(exposure[i]), link_name)
            table.append({"row": i, "mean": result["mean"], "q025": result["q025"], "q975": result["q975"]})
        out = write_report(table, cfg.out_dir / "predictive.csv", f"Posterior predictive means ({link_name} link)")
        return {"success": True, "link": link_name, "predictive": out, "rows": table}

    @app.command()
    @reported
    def compare(
        config: Optional[Path] = ConfigOption,
        seed: Optional[int] = SeedOption,
        out_dir: Optional[Path] = OutDirOption,
        data: Optional[Path] = DataOption,
    ) -> Dict[str, Any]:
        """Fit the lambda-link and exp-link models to the same data and prior and compare them."""
        cfg = load_run_config(config, seed=seed, out_dir=out_dir, data_path=data)
        poisson, names = read_poisson_table(require_data(cfg))
        prior: GaussianPrior = cfg.build_prior(poisson.p)

        lambda_draws = run_chains(poisson, prior, cfg.sampler_config())
        exp_draws = run_mh_chain(poisson, prior, cfg.mh_config())
        write_draws(lambda_draws, cfg.out_dir / "draws_lambda.csv", names)
        write_draws(exp_draws, cfg.out_dir / "draws_exp.csv", names)

        lambda_summary, exp_summary = summarize(lambda_draws), summarize(exp_draws)
        ess_rows = [
            {
                "parameter": name,
                "mean_lambda": float(lambda_summary.mean[k]),
                "mean_exp": float(exp_summary.mean[k]),
                "ess_lambda": float(lambda_summary.ess[k]),
                "ess_exp": float(exp_summary.ess[k]),
            }
            for k, name in enumerate(names)
        ]
        ess_path = write_report(ess_rows, cfg.out_dir / "ess_comparison.csv", "Effective sample size by link")

        panels, table = [], []
        for label, x, members in _distinct_rows(poisson, names):
            lam = posterior_predictive_mean(lambda_draws, x, 1.0, "lambda")
            ex = posterior_predictive_mean(exp_draws, x, 1.0, "exp")
            observed = float(np.mean(poisson.counts[members] / poisson.exposures[members]))
            panels.append(Panel(label, {"lambda link": lam["draws"], "exp link": ex["draws"]}, observed))
            table.append(
                {
                    "group": label,
                    "n_rows": int(members.shape[0]),
                    "observed_mean": observed,
                    "lambda_mean": lam["mean"],
                    "lambda_q025": lam["q025"],
                    "lambda_q975": lam["q975"],
                    "exp_mean": ex["mean"],
                    "exp_q025": ex["q025"],
                    "exp_q975": ex["q975"],
                }
            )
        predictive_path = write_report(table, cfg.out_dir / "predictive.csv", "Posterior predictive means by group")
        svg_path = emit_density_svg(panels, cfg.out_dir / "predictive.svg", "Posterior predictive conditional means")
        return {
            "success": True,
            "ess_comparison": ess_path,
            "predictive": predictive_path,
            "svg": svg_path,
            "exp_acceptance": exp_draws.acceptance,
            "groups": table,
        }

    @app.command()
    @reported
    def simulate(
        kind: SimulateKind = typer.Option(SimulateKind.SPARROW, "--kind", help="What to generate"),
        out: Path = typer.Option(..., "--out", help="Output CSV"),
        seed: int = typer.Option(0, "--seed"),
        beta: Optional[str] = typer.Option(None, "--beta", help="Comma-separated coefficients"),
        data: Optional[Path] = typer.Option(None, "--data", help="Poisson CSV whose design is reused"),
        n: int = typer.Option(20, "--n", min=1, help="Observations (multinomial)"),
        categories: int = typer.Option(2, "--categories", min=1, help="Non-baseline categories (multinomial)"),
        trials: int = typer.Option(2, "--trials", min=1, help="Trials per observation (multinomial)"),
        grid_min: float = typer.Option(-5.0, "--grid-min"),
        grid_max: float = typer.Option(5.0, "--grid-max"),
        points: int = typer.Option(101, "--points", min=2),
    ) -> Dict[str, Any]:
        """Generate synthetic datasets, or tabulate lambda against exp."""
        rng = RngStream(seed)
        coef = parse_vector(beta, "beta")
        out.parent.mkdir(parents=True, exist_ok=True)

        if kind == SimulateKind.LINK_CURVE:
            curve = link_curve(np.linspace(grid_min, grid_max, points))
            frame = pd.DataFrame(curve, columns=["xi", "lambda", "exp"])
        elif kind == SimulateKind.MULTINOMIAL:
            coef = coef if coef is not None else np.array([0.5, -0.5])
            gen = rng.generator
            design = MultinomialDesign(
                covariates=gen.normal(size=(n * categories, coef.shape[0])),
                obs_index=np.repeat(np.arange(n), categories),
                n_obs=n,
            )
            vectors = simulate_multinomial(coef, design, np.full(n, trials), rng)
            records = []
            for i, counts in enumerate(vectors):
                rows = design.covariates[design.obs_index == i]
                for k, count in enumerate(counts):
                    x = np.zeros(coef.shape[0]) if k == 0 else rows[k - 1]
                    record = {"obs_id": i + 1, "category": k, "count": int(count), "trials": trials}
                    record.update({f"x{j}": float(v) for j, v in enumerate(x)})
                    records.append(record)
            frame = pd.DataFrame(records)
        else:
            if kind == SimulateKind.SPARROW:
                age = np.repeat(np.arange(1, len(SPARROW_AGE_COUNTS) + 1), SPARROW_AGE_COUNTS).astype(float)
                names = ["const", "age", "age2"]
                template = PoissonData(np.column_stack([np.ones_like(age), age, age ** 2]), np.zeros(age.shape[0]))
                coef = coef if coef is not None else np.array(SPARROW_BETA)
            else:
                if data is None:
                    raise DomainError("--kind poisson needs --data for the design")
                template, names = read_poisson_table(data)
                if coef is None:
                    raise DomainError("--kind poisson needs --beta")
            if coef.shape != (template.p,):
                raise DomainError(f"--beta needs {template.p} entries")
            frame = pd.DataFrame(template.design, columns=names)
            frame.insert(0, "y", simulate_counts(coef, template.design, template.exposures, rng))
            if not np.all(template.exposures == 1.0):
                frame["exposure"] = template.exposures
        frame.to_csv(out, index=False, float_format="%.17g", lineterminator="\n")
        logger.info("Wrote %d simulated rows to %s", len(frame), out)
        return {"success": True, "kind": kind.value, "out": out, "rows": len(frame)}
