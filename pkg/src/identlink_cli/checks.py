"""
Commands that check the samplers: validate, drift-check and lemma-check.

Each writes its report under the output directory and exits 1 when the
check ran but did not pass.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import typer

from identlink import RngStream
from identlink.diagnostics import (
    HFunction,
    empirical_drift,
    getting_it_right,
    gir_model_for,
    lemma4_bound_test,
    uhat_invariance_test,
    uhat_marginal_test,
)
from identlink.errors import DomainError

from .io import read_poisson_table, write_report
from .options import ConfigOption, DataOption, OutDirOption, SeedOption, parse_vector, require_data
from .results import reported
from .settings import load_run_config

logger = logging.getLogger(__name__)


def _probe_points(norms: np.ndarray, p: int, n_directions: int, rng: RngStream) -> List[np.ndarray]:
    directions = rng.generator.standard_normal((n_directions, p))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return [float(r) * d for r in norms for d in (directions[:1] if r == 0 else directions)]


def register_check_commands(app: typer.Typer):
    """Register the diagnostic commands with the Typer app."""

    @app.command()
    @reported
    def validate(
        model: str = typer.Option("poisson-lambda", "--model", help="poisson-lambda, multinomial-lambda, poisson-exp or bernoulli"),
        outer: int = typer.Option(200_000, "--outer", min=0, help="Outer iterations of each simulator"),
        seed: int = typer.Option(0, "--seed"),
        threshold: Optional[float] = typer.Option(
            None, "--threshold", min=0.0, help="Fixed |z| cutoff; default is the Bonferroni value at --level"
        ),
        level: float = typer.Option(0.01, "--level", min=0.0, max=1.0, help="Family-wise test level"),
        out_dir: Optional[Path] = OutDirOption,
    ) -> Dict[str, Any]:
        """Getting-it-right test of a model's transition kernel on a small problem."""
        cfg = load_run_config(None, out_dir=out_dir)
        gir = gir_model_for(model)
        report = getting_it_right(
            gir, outer, RngStream(seed, 0), threshold, successive_rng=RngStream(seed, 1), level=level
        )
        path = write_report(report, cfg.out_dir / f"gir_{gir.name}.csv", f"Getting-it-right: {gir.name}, {outer} iterations")
        return {
            "success": report.passed,
            "model": gir.name,
            "n_outer": outer,
            "max_abs_z": report.max_abs_z,
            "critical_z": report.critical_z,
            "report": path,
        }

    @app.command("drift-check")
    @reported
    def drift_check(
        config: Optional[Path] = ConfigOption,
        data: Optional[Path] = DataOption,
        seed: Optional[int] = SeedOption,
        out_dir: Optional[Path] = OutDirOption,
        norms: str = typer.Option("0,10,100,1000", "--norms", help="Comma-separated increasing norms"),
        directions: int = typer.Option(4, "--directions", min=1),
        n_mc: int = typer.Option(10_000, "--n-mc", min=2, help="One-sweep replicates per probe point"),
        rao_blackwell: bool = typer.Option(False, "--rao-blackwell", help="Average E[V | latents] instead of V"),
    ) -> Dict[str, Any]:
        """Estimate the one-sweep expected energy (PV)(beta) against V(beta) on a norm grid."""
        cfg = load_run_config(config, seed=seed, out_dir=out_dir, data_path=data)
        poisson, _ = read_poisson_table(require_data(cfg))
        prior = cfg.build_prior(poisson.p)
        report = empirical_drift(
            poisson, prior, parse_vector(norms, "norms"), directions, n_mc, RngStream(cfg.seed), rao_blackwell
        )
        path = write_report(report, cfg.out_dir / "drift.csv", f"One-sweep drift, {n_mc} replicates per point")
        return {
            "success": report.contracts_at_largest_norm(),
            "mean_ratio_by_norm": report.mean_ratios(),
            "failed_points": sum(p.error is not None for p in report.points),
            "report": path,
        }

    @app.command("lemma-check")
    @reported
    def lemma_check(
        config: Optional[Path] = ConfigOption,
        data: Optional[Path] = DataOption,
        seed: Optional[int] = SeedOption,
        out_dir: Optional[Path] = OutDirOption,
        norms: str = typer.Option("0,3,30", "--norms", help="Comma-separated norms of the probe points"),
        directions: int = typer.Option(1, "--directions", min=1),
        draws: int = typer.Option(100_000, "--draws", min=2, help="Monte Carlo draws per test"),
    ) -> Dict[str, Any]:
        """Check the laws of the rescaled latents at several beta points."""
        cfg = load_run_config(config, seed=seed, out_dir=out_dir, data_path=data)
        poisson, _ = read_poisson_table(require_data(cfg))
        grid = parse_vector(norms, "norms")
        if grid.size == 0 or np.any(grid < 0):
            raise DomainError("--norms must be non-negative")
        rng = RngStream(cfg.seed)
        points = _probe_points(grid, poisson.p, directions, rng)

        marginal = [uhat_marginal_test(poisson, beta, draws, rng) for beta in points]
        invariance = uhat_invariance_test(poisson, points, draws, rng) if len(points) > 1 else None
        bounds = [
            lemma4_bound_test(poisson, beta, i, h, draws, rng)
            for beta in points
            for i in np.nonzero(poisson.counts > 0)[0]
            for h in HFunction
        ]

        write_report(marginal, cfg.out_dir / "lemma_uhat.csv", "KS of b u against Ga(y, 1)")
        if invariance is not None:
            write_report(invariance, cfg.out_dir / "lemma_invariance.csv", "Two-sample KS across beta points")
        write_report(bounds, cfg.out_dir / "lemma_bound.csv", "E[h(t)] against 2 E[h(z)]")
        passed = (
            all(r.passed for r in marginal)
            and (invariance is None or invariance.passed)
            and all(b.holds for b in bounds)
        )
        return {
            "success": passed,
            "points": len(points),
            "uhat_passed": all(r.passed for r in marginal),
            "invariance_passed": None if invariance is None else invariance.passed,
            "bounds_held": sum(b.holds for b in bounds),
            "bounds_tested": len(bounds),
            "out_dir": cfg.out_dir,
        }
