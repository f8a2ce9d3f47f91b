"""
Multinomial response regression under the approximate-identity link.

Observation i has m_i trials over categories 0..p_i. Category 0 is the
baseline and carries no covariates; category k >= 1 has covariates x_{i,k}
and weight lambda_{i,k} = lambda(x_{i,k}^T beta), so that

    P(category 0) = 1 / (1 + Lambda_i),  P(category k) = lambda_{i,k} / (1 + Lambda_i)

with Lambda_i = sum_k lambda_{i,k}. Categories are stored flattened: row r of
the design belongs to observation obs_index[r].
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from . import link
from .config import SamplerConfig
from .draws import DrawMatrix, gibbs_chain, run_chain_set
from .errors import DomainError
from .poisson_model import GaussianPrior, initial_beta
from .rand_kernels import (
    IG_MEAN_FLOOR,
    PrecisionGaussian,
    RngStream,
    sample_gamma,
    sample_inverse_gaussian,
    sample_multinomial,
    sample_mvn_precision,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MultinomialDesign:
    """Covariates of all non-baseline categories, flattened across observations."""

    covariates: np.ndarray
    obs_index: np.ndarray
    n_obs: int

    def __post_init__(self):
        covariates = np.atleast_2d(np.asarray(self.covariates, dtype=np.float64))
        obs_index = np.asarray(self.obs_index, dtype=np.int64)
        if covariates.shape[0] != obs_index.shape[0]:
            raise DomainError("one obs_index entry is needed per covariate row")
        if not np.all(np.isfinite(covariates)):
            raise DomainError("covariates have non-finite entries")
        if np.any(np.diff(obs_index) < 0):
            raise DomainError("category rows must be grouped by observation")
        sizes = np.bincount(obs_index, minlength=self.n_obs)
        if sizes.shape[0] != self.n_obs or np.any(sizes < 1):
            raise DomainError("every observation needs at least one non-baseline category")
        object.__setattr__(self, "covariates", covariates)
        object.__setattr__(self, "obs_index", obs_index)

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    @property
    def categories(self) -> np.ndarray:
        """p_i for each observation."""
        return np.bincount(self.obs_index, minlength=self.n_obs)

    def attach(self, counts: Sequence[Sequence[int]]) -> "MultinomialData":
        """Combine with per-observation count vectors (y_{i,0}, ..., y_{i,p_i})."""
        sizes = self.categories
        if len(counts) != self.n_obs:
            raise DomainError(f"expected {self.n_obs} count vectors")
        baseline, rest = [], []
        for i, row in enumerate(counts):
            row = np.asarray(row, dtype=np.int64)
            if row.shape != (sizes[i] + 1,):
                raise DomainError(f"observation {i} needs {sizes[i] + 1} counts")
            baseline.append(row[0])
            rest.append(row[1:])
        return MultinomialData(self, np.array(baseline), np.concatenate(rest))


@dataclass(frozen=True)
class MultinomialData:
    """A MultinomialDesign together with its counts.

    Attributes:
        design: category covariates
        baseline_counts: y_{i,0} per observation
        counts: y_{i,k}, k >= 1, aligned with design rows
    """

    design: MultinomialDesign
    baseline_counts: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        baseline = np.asarray(self.baseline_counts, dtype=np.int64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if baseline.shape != (self.design.n_obs,) or counts.shape != self.design.obs_index.shape:
            raise DomainError("count arrays do not match the design")
        if np.any(baseline < 0) or np.any(counts < 0):
            raise DomainError("counts must be non-negative")
        if np.any(self.trials < 1):
            raise DomainError("every observation needs m_i >= 1 trials")
        object.__setattr__(self, "baseline_counts", baseline)
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return self.design.n_obs

    @property
    def p(self) -> int:
        return self.design.p

    @property
    def trials(self) -> np.ndarray:
        """m_i = sum_k y_{i,k}."""
        return np.asarray(self.baseline_counts) + np.bincount(
            self.design.obs_index, weights=np.asarray(self.counts), minlength=self.design.n_obs
        ).astype(np.int64)

    def count_vector(self, i: int) -> np.ndarray:
        return np.concatenate([[self.baseline_counts[i]], self.counts[self.design.obs_index == i]])

    @property
    def is_bernoulli(self) -> bool:
        return bool(np.all(self.design.categories == 1) and np.all(self.trials == 1))


@dataclass(frozen=True)
class MultinomialChainState:
    """beta with the latents u_{i,0}, u_{i,k} and v_{i,k} (flattened like the design)."""

    beta: np.ndarray
    u0: np.ndarray
    u: np.ndarray
    v: np.ndarray


def _weights(beta: np.ndarray, design: MultinomialDesign):
    lv = link.link_value(design.covariates @ beta)
    total = np.bincount(design.obs_index, weights=lv.lam, minlength=design.n_obs)
    return lv, total


def category_probs(beta: np.ndarray, obs_index: int, data: MultinomialData) -> np.ndarray:
    """(1, lambda_{i,1}, ..., lambda_{i,p_i}) / (1 + Lambda_i)."""
    if not 0 <= obs_index < data.n:
        raise DomainError(f"observation index {obs_index} out of range")
    rows = data.design.covariates[data.design.obs_index == obs_index]
    lam = np.atleast_1d(link.lam(rows @ np.asarray(beta, dtype=np.float64)))
    weights = np.concatenate([[1.0], lam])
    return weights / weights.sum()


def draw_latents(beta: np.ndarray, data: MultinomialData, rng: RngStream):
    """Draw (u0, u, v) given beta; u_{i,k} = 0 where y_{i,k} = 0."""
    design = data.design
    lv, total = _weights(beta, design)
    u0 = sample_gamma(rng, data.trials, 2.0 + 2.0 * total, size=data.n)
    u0 = np.atleast_1d(u0)
    u = np.zeros(design.obs_index.shape[0])
    positive = data.counts > 0
    if np.any(positive):
        u[positive] = sample_gamma(rng, data.counts[positive], lv.b[positive], size=int(positive.sum()))
    pair = u + u0[design.obs_index]
    with np.errstate(over="ignore"):
        ig_mean = np.maximum(1.0 / (pair * lv.s), IG_MEAN_FLOOR)
    v = np.atleast_1d(sample_inverse_gaussian(rng, ig_mean, 1.0, size=pair.shape[0]))
    return u0, u, v


def beta_conditional(
    u0: np.ndarray, u: np.ndarray, v: np.ndarray, data: MultinomialData, prior: GaussianPrior
) -> PrecisionGaussian:
    """Psi + sum x v (u + u0)^2 x^T and Psi mu + sum x (u - u0)."""
    X = data.design.covariates
    u0_row = u0[data.design.obs_index]
    w = v * np.square(u + u0_row)
    precision = prior.precision + (X.T * w) @ X
    shift = prior.linear_term + X.T @ (u - u0_row)
    return PrecisionGaussian(precision=precision, shift=shift)


def transition(beta, data: MultinomialData, prior: GaussianPrior, rng: RngStream) -> MultinomialChainState:
    u0, u, v = draw_latents(beta, data, rng)
    beta = sample_mvn_precision(rng, beta_conditional(u0, u, v, data, prior))
    return MultinomialChainState(beta=beta, u0=u0, u=u, v=v)


def gibbs_sweep_multinomial(
    state: MultinomialChainState, data: MultinomialData, prior: GaussianPrior, rng: RngStream
) -> MultinomialChainState:
    """One scan: u, then v, then beta, each from its full conditional."""
    if state.beta.shape != (data.p,) or prior.p != data.p:
        raise DomainError(f"beta and prior must have dimension p = {data.p}")
    return transition(state.beta, data, prior, rng)


def multinomial_log_likelihood(beta: np.ndarray, data: MultinomialData) -> float:
    beta = np.asarray(beta, dtype=np.float64)
    lv, total = _weights(beta, data.design)
    m = data.trials
    value = (
        np.sum(gammaln(m + 1.0))
        - np.sum(gammaln(data.baseline_counts + 1.0))
        - np.sum(gammaln(data.counts + 1.0))
        - np.sum(m * np.log1p(total))
        + np.sum(data.counts * np.log(lv.lam))
    )
    return float(value)


def build_polychotomous_design(shared_covariates: np.ndarray, n_categories: int) -> MultinomialDesign:
    """Block design in which one stacked beta = (beta_1, ..., beta_K) covers every category.

    x_{i,k} is zero except for its k-th block of width q, which equals x_i, so
    x_{i,k}^T beta = x_i^T beta_k.
    """
    X = np.atleast_2d(np.asarray(shared_covariates, dtype=np.float64))
    n, q = X.shape
    if q < 1 or n_categories < 1:
        raise DomainError("need q >= 1 covariates and at least one category")
    blocks = np.zeros((n, n_categories, q * n_categories))
    for k in range(n_categories):
        blocks[:, k, k * q:(k + 1) * q] = X
    return MultinomialDesign(
        covariates=blocks.reshape(n * n_categories, q * n_categories),
        obs_index=np.repeat(np.arange(n), n_categories),
        n_obs=n,
    )


def bernoulli_success_prob(xi):
    """lambda / (1 + lambda), evaluated as 2 / (2 + b(xi))."""
    b = np.asarray(link.b_coeff(xi))
    prob = 2.0 / (2.0 + b)
    return float(prob) if prob.ndim == 0 else prob


def gibbs_sweep_bernoulli(
    beta: np.ndarray, data: MultinomialData, prior: GaussianPrior, rng: RngStream
) -> np.ndarray:
    """Single-latent-pair scan for binary data (m_i = 1, p_i = 1).

    With sign = +1 for a success and -1 otherwise, u_i ~ Ga(1, 2 + s_i - sign xi_i),
    v_i ~ IGauss(1 / (u_i s_i), 1), then beta is Gaussian with precision
    Psi + sum x v u^2 x^T and shift Psi mu + sum sign u x.
    """
    if not data.is_bernoulli:
        raise DomainError("gibbs_sweep_bernoulli needs m_i = 1 and p_i = 1 for every observation")
    X = data.design.covariates
    lv = link.link_value(X @ beta)
    sign = np.where(data.counts > 0, 1.0, -1.0)
    rate = 2.0 + np.where(sign > 0, lv.b, 2.0 * lv.lam)
    u = np.atleast_1d(sample_gamma(rng, 1.0, rate, size=data.n))
    with np.errstate(over="ignore"):
        ig_mean = np.maximum(1.0 / (u * lv.s), IG_MEAN_FLOOR)
    v = np.atleast_1d(sample_inverse_gaussian(rng, ig_mean, 1.0, size=data.n))
    precision = prior.precision + (X.T * (v * u * u)) @ X
    shift = prior.linear_term + X.T @ (sign * u)
    return sample_mvn_precision(rng, PrecisionGaussian(precision, shift))


def simulate_counts(beta: np.ndarray, design: MultinomialDesign, trials: np.ndarray, rng: RngStream) -> List[np.ndarray]:
    """Draw one count vector per observation from the model at beta."""
    lam = np.atleast_1d(link.lam(design.covariates @ beta))
    out = []
    for i in range(design.n_obs):
        weights = np.concatenate([[1.0], lam[design.obs_index == i]])
        probs = weights / weights.sum()
        probs[-1] = max(0.0, 1.0 - probs[:-1].sum())
        out.append(sample_multinomial(rng, int(trials[i]), probs))
    return out


def run_multinomial_chains(
    data: MultinomialData, prior: GaussianPrior, config: SamplerConfig, bernoulli: Optional[bool] = None
) -> DrawMatrix:
    """Multi-chain driver; uses the single-latent scan for binary data unless told otherwise."""
    if prior.p != data.p:
        raise DomainError(f"prior dimension {prior.p} does not match design p = {data.p}")
    use_bernoulli = data.is_bernoulli if bernoulli is None else bernoulli

    def _sweep(beta, rng):
        if use_bernoulli:
            return gibbs_sweep_bernoulli(beta, data, prior, rng), {}
        state = transition(beta, data, prior, rng)
        return state.beta, {"u0": state.u0, "u": state.u, "v": state.v}

    def _one(chain: int, rng: RngStream):
        start = initial_beta(config.init_beta, prior, rng)
        return gibbs_chain(
            chain, rng, start, _sweep, config.burn_in, config.keep, config.thin, store_latents=config.store_latents
        )

    model = "bernoulli-lambda" if use_bernoulli else "multinomial-lambda"
    logger.info("Running %s sampler on %d observations", model, data.n)
    return run_chain_set(_one, config.n_chains, config.seed, model, config.workers)
