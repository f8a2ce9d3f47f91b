"""
Monte Carlo probes of the Poisson sampler's latent-variable laws and drift.

- uhat_marginal_test: b_i u_i given beta is Ga(y_i, 1) whatever beta is.
- uhat_invariance_test: the same law compared across several beta points.
- lemma4_bound_test: E[h(t_i) | beta] <= 2 E[h(z)] for the rescaled
  inverse-Gaussian latent t_i.
- empirical_drift: one-sweep expected energy (PV)(beta) of V = beta^T Psi beta.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import stats
from scipy.linalg import solve_triangular

from .. import link
from ..errors import DomainError, IdentlinkError, LowPowerWarning
from ..poisson_model import GaussianPrior, PoissonData, beta_conditional, draw_latents
from ..rand_kernels import RngStream, cholesky_lower, gaussian_mean

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.01
LOW_POWER_DRAWS = 1000
DRAW_CHUNK = 10_000


class HFunction(str, Enum):
    SQUARE = "square"
    ABS = "abs"
    FOURTH = "fourth"


H_FUNCTIONS: Dict[HFunction, Callable[[np.ndarray], np.ndarray]] = {
    HFunction.SQUARE: np.square,
    HFunction.ABS: np.abs,
    HFunction.FOURTH: lambda t: np.square(np.square(t)),
}

# 2 E[h(z)] for z ~ N(0, 1)
H_BOUNDS: Dict[HFunction, float] = {
    HFunction.SQUARE: 2.0,
    HFunction.ABS: 2.0 * math.sqrt(2.0 / math.pi),
    HFunction.FOURTH: 6.0,
}


@dataclass
class KsRow:
    obs_index: int
    y: int
    statistic: float
    p_value: float
    critical: float
    passed: bool
    comparison: str = "Ga(y, 1)"


@dataclass
class KsReport:
    """KS comparisons at a Bonferroni-corrected level alpha / len(rows)."""

    alpha: float
    n_draws: int
    rows: List[KsRow] = field(default_factory=list)
    skipped: List[int] = field(default_factory=list)
    low_power: bool = False

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def _check_beta(beta, data: PoissonData) -> np.ndarray:
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (data.p,) or not np.all(np.isfinite(beta)):
        raise DomainError(f"beta must be a finite vector of length {data.p}")
    return beta


def _positive_rows(data: PoissonData) -> np.ndarray:
    rows = np.nonzero(data.counts > 0)[0]
    skipped = np.nonzero(data.counts == 0)[0]
    if skipped.size:
        logger.warning("Skipping %d observations with y = 0: %s", skipped.size, skipped.tolist())
    return rows


def _flag_low_power(n_draws: int) -> bool:
    if n_draws < LOW_POWER_DRAWS:
        warnings.warn(
            f"{n_draws} draws is below {LOW_POWER_DRAWS}; KS results have low power",
            LowPowerWarning,
            stacklevel=3,
        )
        return True
    return False


def uhat_samples(data: PoissonData, beta: np.ndarray, n_draws: int, rng: RngStream) -> np.ndarray:
    """n_draws x n matrix of b_i u_i, u drawn by the sampler's latent step at beta."""
    beta = _check_beta(beta, data)
    b = np.atleast_1d(link.b_coeff(data.design @ beta))
    out = np.empty((n_draws, data.n))
    for start in range(0, n_draws, DRAW_CHUNK):
        stop = min(start + DRAW_CHUNK, n_draws)
        u, _, _ = draw_latents(beta, data, rng, replicates=stop - start)
        out[start:stop] = u * b
    return out


def uhat_marginal_test(
    data: PoissonData, beta, n_draws: int, rng: RngStream, alpha: float = DEFAULT_ALPHA
) -> KsReport:
    """One-sample KS of b_i u_i against Ga(y_i, 1) for every observation with y_i >= 1."""
    if n_draws < 1:
        raise DomainError("n_draws must be >= 1")
    rows = _positive_rows(data)
    report = KsReport(
        alpha=alpha,
        n_draws=n_draws,
        skipped=np.nonzero(data.counts == 0)[0].tolist(),
        low_power=_flag_low_power(n_draws),
    )
    if rows.size == 0:
        return report
    uhat = uhat_samples(data, beta, n_draws, rng)
    critical = float(stats.kstwo.ppf(1.0 - alpha / rows.size, n_draws))
    for i in rows:
        y = int(data.counts[i])
        result = stats.kstest(uhat[:, i], stats.gamma(a=y).cdf)
        report.rows.append(
            KsRow(
                obs_index=int(i),
                y=y,
                statistic=float(result.statistic),
                p_value=float(result.pvalue),
                critical=critical,
                passed=bool(result.statistic <= critical),
            )
        )
    return report


def uhat_invariance_test(
    data: PoissonData,
    betas: Sequence[np.ndarray],
    n_draws: int,
    rng: RngStream,
    alpha: float = DEFAULT_ALPHA,
) -> KsReport:
    """Two-sample KS of b_i u_i between the first beta point and every other one.

    The law of b_i u_i does not involve beta, so the samples at different
    points should be indistinguishable.
    """
    if len(betas) < 2:
        raise DomainError("at least two beta points are needed")
    rows = _positive_rows(data)
    report = KsReport(
        alpha=alpha,
        n_draws=n_draws,
        skipped=np.nonzero(data.counts == 0)[0].tolist(),
        low_power=_flag_low_power(n_draws),
    )
    if rows.size == 0:
        return report
    samples = [uhat_samples(data, beta, n_draws, rng) for beta in betas]
    n_tests = rows.size * (len(betas) - 1)
    # asymptotic critical value for two samples of equal size n
    critical = float(stats.kstwobign.ppf(1.0 - alpha / n_tests) * math.sqrt(2.0 / n_draws))
    for j in range(1, len(betas)):
        for i in rows:
            result = stats.ks_2samp(samples[0][:, i], samples[j][:, i])
            report.rows.append(
                KsRow(
                    obs_index=int(i),
                    y=int(data.counts[i]),
                    statistic=float(result.statistic),
                    p_value=float(result.pvalue),
                    critical=critical,
                    passed=bool(result.statistic <= critical),
                    comparison=f"point 0 vs point {j}",
                )
            )
    return report


@dataclass
class BoundResult:
    obs_index: int
    h: HFunction
    lhs: float
    se: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 3.0 * self.se


def rescaled_ig_latents(data: PoissonData, beta, obs_index: int, n_draws: int, rng: RngStream) -> np.ndarray:
    """t_i = sqrt(c) (sqrt(c v) - 1/sqrt(c v)) with c = (n_i/2 + u_i) s_i, (u_i, v_i) redrawn n_draws times."""
    beta = _check_beta(beta, data)
    row = PoissonData(
        data.design[obs_index:obs_index + 1],
        data.counts[obs_index:obs_index + 1],
        data.exposures[obs_index:obs_index + 1],
    )
    s = float(link.s_coeff(row.design[0] @ beta))
    out = np.empty(n_draws)
    for start in range(0, n_draws, DRAW_CHUNK):
        stop = min(start + DRAW_CHUNK, n_draws)
        u, v, _ = draw_latents(beta, row, rng, replicates=stop - start)
        c = (0.5 * row.exposures[0] + u[:, 0]) * s
        root = np.sqrt(c * v[:, 0])
        out[start:stop] = np.sqrt(c) * (root - 1.0 / root)
    return out


def lemma4_bound_test(
    data: PoissonData,
    beta,
    obs_index: int,
    h_id,
    n_draws: int,
    rng: RngStream,
) -> BoundResult:
    """Monte Carlo E[h(t_i) | beta] against the exact 2 E[h(z)]."""
    if not 0 <= obs_index < data.n:
        raise DomainError(f"observation index {obs_index} out of range")
    if data.counts[obs_index] < 1:
        raise DomainError(f"observation {obs_index} has y = 0")
    if n_draws < 2:
        raise DomainError("n_draws must be >= 2")
    h = HFunction(h_id)
    values = H_FUNCTIONS[h](rescaled_ig_latents(data, beta, obs_index, n_draws, rng))
    return BoundResult(
        obs_index=obs_index,
        h=h,
        lhs=float(values.mean()),
        se=float(values.std(ddof=1) / math.sqrt(n_draws)),
        rhs=H_BOUNDS[h],
    )


@dataclass
class DriftPoint:
    norm: float
    direction: int
    beta: np.ndarray
    energy: float
    pv: float = math.nan
    se: float = math.nan
    error: Optional[str] = None

    @property
    def ratio(self) -> float:
        if self.energy == 0 or math.isnan(self.pv):
            return math.nan
        return self.pv / self.energy

    @property
    def ratio_se(self) -> float:
        if self.energy == 0:
            return math.nan
        return self.se / self.energy


@dataclass
class DriftReport:
    """(PV)(beta) estimates at beta = r d for r on a grid and random unit directions d."""

    n_mc: int
    rao_blackwell: bool
    points: List[DriftPoint] = field(default_factory=list)

    @property
    def norms(self) -> List[float]:
        return sorted({p.norm for p in self.points})

    def at_norm(self, norm: float) -> List[DriftPoint]:
        return [p for p in self.points if p.norm == norm]

    def mean_ratios(self) -> Dict[float, float]:
        """Average finite ratio at each grid norm; descriptive only."""
        out = {}
        for r in self.norms:
            ratios = [p.ratio for p in self.at_norm(r) if not math.isnan(p.ratio)]
            out[r] = float(np.mean(ratios)) if ratios else math.nan
        return out

    def contracts_at_largest_norm(self, n_se: float = 3.0) -> bool:
        """ratio + n_se * SE < 1 at every probe point of the largest norm."""
        if not self.points:
            return False
        largest = self.at_norm(self.norms[-1])
        return all(p.error is None and p.ratio + n_se * p.ratio_se < 1.0 for p in largest)


def _replicate_energies(
    beta0: np.ndarray, data: PoissonData, prior: GaussianPrior, n_mc: int, rng: RngStream, rao_blackwell: bool
) -> np.ndarray:
    u, _, w = draw_latents(beta0, data, rng, replicates=n_mc)
    gen = rng.generator
    eye = np.eye(data.p)
    energies = np.empty(n_mc)
    for k in range(n_mc):
        g = beta_conditional(u[k], w[k], data, prior)
        L = cholesky_lower(g.precision)
        mean = gaussian_mean(g, L)
        if rao_blackwell:
            L_inv = solve_triangular(L, eye, lower=True)
            covariance = L_inv.T @ L_inv
            energies[k] = prior.energy(mean) + float(np.sum(prior.precision * covariance))
        else:
            beta = mean + solve_triangular(L, gen.standard_normal(data.p), lower=True, trans="T")
            energies[k] = prior.energy(beta)
    return energies


def empirical_drift(
    data: PoissonData,
    prior: GaussianPrior,
    norm_grid: Sequence[float],
    n_directions: int,
    n_mc: int,
    rng: RngStream,
    rao_blackwell: bool = False,
) -> DriftReport:
    """Estimate (PV)(beta_0) by n_mc independent single sweeps from each probe point.

    Latents are redrawn from their beta_0 conditionals for every replicate.
    With rao_blackwell each replicate contributes E[V(beta) | u, v] instead
    of V at one beta draw. Numerical failures are recorded on the point.
    """
    grid = np.asarray(norm_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid < 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("norm_grid must be a non-empty, non-negative, increasing sequence")
    if n_directions < 1 or n_mc < 2:
        raise DomainError("n_directions must be >= 1 and n_mc >= 2")
    if prior.p != data.p:
        raise DomainError(f"prior dimension {prior.p} does not match design p = {data.p}")

    directions = rng.generator.standard_normal((n_directions, data.p))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)

    report = DriftReport(n_mc=n_mc, rao_blackwell=rao_blackwell)
    for r in grid:
        for j, d in enumerate(directions):
            beta0 = float(r) * d
            point = DriftPoint(norm=float(r), direction=j, beta=beta0, energy=prior.energy(beta0))
            try:
                with np.errstate(over="raise", invalid="raise"):
                    energies = _replicate_energies(beta0, data, prior, n_mc, rng, rao_blackwell)
            except (IdentlinkError, FloatingPointError) as e:
                point.error = str(e)
                logger.warning("Drift probe at norm %g, direction %d failed: %s", r, j, e)
            else:
                point.pv = float(energies.mean())
                point.se = float(energies.std(ddof=1) / math.sqrt(n_mc))
            report.points.append(point)
        logger.info("Drift ratios at norm %g: %s", r, [round(p.ratio, 4) for p in report.at_norm(float(r))])
    return report
