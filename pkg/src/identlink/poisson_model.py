"""
Poisson regression under the approximate-identity link.

    beta ~ N_p(mu, Psi^-1),   y_i ~ Po(n_i lambda(x_i^T beta))

The Gibbs sampler augments each observation with a gamma latent u_i
(identically 0 when y_i = 0) and an inverse-Gaussian latent v_i, after which
beta is conditionally Gaussian with precision Psi + X^T W X.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy.special import gammaln

from . import link
from .config import InitKind, SamplerConfig
from .draws import DrawMatrix, gibbs_chain, run_chain_set
from .errors import DomainError, NumericalError
from .rand_kernels import (
    IG_MEAN_FLOOR,
    PrecisionGaussian,
    RngStream,
    cholesky_lower,
    sample_gamma,
    sample_inverse_gaussian,
    sample_mvn_precision,
    sample_poisson,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaussianPrior:
    """N(mean, precision^-1) prior on the coefficients."""

    mean: np.ndarray
    precision: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        precision = np.atleast_2d(np.asarray(self.precision, dtype=np.float64))
        if precision.shape != (mean.shape[0], mean.shape[0]):
            raise DomainError("prior precision must be p x p with p = len(mean)")
        if not np.allclose(precision, precision.T, rtol=1e-12, atol=0.0):
            raise DomainError("prior precision must be symmetric")
        try:
            cholesky_lower(precision)
        except NumericalError as e:
            raise DomainError(f"prior precision is not positive definite: {e}") from e
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "precision", precision)

    @property
    def p(self) -> int:
        return self.mean.shape[0]

    @classmethod
    def isotropic(cls, p: int, precision: float = 1.0, mean: float = 0.0) -> "GaussianPrior":
        return cls(mean=np.full(p, mean), precision=precision * np.eye(p))

    @property
    def linear_term(self) -> np.ndarray:
        return self.precision @ self.mean

    def energy(self, beta: np.ndarray) -> float:
        """V(beta) = beta^T Psi beta."""
        return float(beta @ self.precision @ beta)

    def draw(self, rng: RngStream) -> np.ndarray:
        return sample_mvn_precision(rng, PrecisionGaussian(self.precision, self.linear_term))


@dataclass(frozen=True)
class PoissonData:
    """Design matrix, counts and exposures of a Poisson regression."""

    design: np.ndarray
    counts: np.ndarray
    exposures: Optional[np.ndarray] = None

    def __post_init__(self):
        design = np.atleast_2d(np.asarray(self.design, dtype=np.float64))
        counts = np.asarray(self.counts)
        n, p = design.shape
        if n < 1 or p < 1:
            raise DomainError("PoissonData needs n >= 1 rows and p >= 1 columns")
        if not np.all(np.isfinite(design)):
            raise DomainError("design has non-finite entries")
        if counts.shape != (n,):
            raise DomainError(f"counts must have length {n}")
        if np.any(counts < 0) or np.any(counts != np.round(counts)):
            raise DomainError("counts must be non-negative integers")
        exposures = np.ones(n) if self.exposures is None else np.asarray(self.exposures, dtype=np.float64)
        if exposures.shape != (n,):
            raise DomainError(f"exposures must have length {n}")
        if not np.all(np.isfinite(exposures)) or np.any(exposures <= 0):
            raise DomainError("exposures must be > 0")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "counts", counts.astype(np.int64))
        object.__setattr__(self, "exposures", exposures)

    @property
    def n(self) -> int:
        return self.design.shape[0]

    @property
    def p(self) -> int:
        return self.design.shape[1]

    def with_counts(self, counts: np.ndarray) -> "PoissonData":
        return PoissonData(self.design, counts, self.exposures)


@dataclass(frozen=True)
class PoissonChainState:
    """Current (beta, u, v, w) configuration of a chain.

    u_i = 0 exactly where y_i = 0, and w_i = v_i (n_i/2 + u_i)^2.
    """

    beta: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray


def _check_dims(beta: np.ndarray, data: PoissonData, prior: GaussianPrior):
    if beta.shape != (data.p,) or prior.p != data.p:
        raise DomainError(f"beta and prior must have dimension p = {data.p}")


def draw_latents(
    beta: np.ndarray, data: PoissonData, rng: RngStream, replicates: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw (u, v) from their conditional given beta and return (u, v, w).

    With `replicates` set, returns arrays of shape (replicates, n) holding
    independent conditional draws at the same beta.
    """
    lv = link.link_value(data.design @ beta)
    y = data.counts
    shape = (data.n,) if replicates is None else (replicates, data.n)
    u = np.zeros(shape)
    positive = y > 0
    if np.any(positive):
        u[..., positive] = sample_gamma(rng, y[positive], lv.b[positive], size=shape[:-1] + (int(positive.sum()),))
    half_n_u = 0.5 * data.exposures + u
    with np.errstate(over="ignore"):
        ig_mean = np.maximum(1.0 / (half_n_u * lv.s), IG_MEAN_FLOOR)
    v = np.asarray(sample_inverse_gaussian(rng, ig_mean, 1.0, size=shape))
    w = v * np.square(half_n_u)
    return u, v, w


def beta_conditional(
    u: np.ndarray, w: np.ndarray, data: PoissonData, prior: GaussianPrior
) -> PrecisionGaussian:
    """Gaussian conditional of beta given the latents.

    precision Psi + X^T W X, shift Psi mu + X^T (u - n/2).
    """
    X = data.design
    precision = prior.precision + (X.T * w) @ X
    shift = prior.linear_term + X.T @ (u - 0.5 * data.exposures)
    return PrecisionGaussian(precision=precision, shift=shift)


def transition(
    beta: np.ndarray, data: PoissonData, prior: GaussianPrior, rng: RngStream
) -> PoissonChainState:
    u, v, w = draw_latents(beta, data, rng)
    beta = sample_mvn_precision(rng, beta_conditional(u, w, data, prior))
    return PoissonChainState(beta=beta, u=u, v=v, w=w)


def gibbs_sweep(
    state: PoissonChainState, data: PoissonData, prior: GaussianPrior, rng: RngStream
) -> PoissonChainState:
    """One scan of the sampler: latents given beta, then beta given latents.

    Only state.beta is read; the latents are redrawn from their conditionals.
    """
    _check_dims(state.beta, data, prior)
    return transition(state.beta, data, prior, rng)


def log_likelihood(beta: np.ndarray, data: PoissonData) -> float:
    """sum_i y_i log(n_i lambda_i) - n_i lambda_i - log(y_i!)."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (data.p,):
        raise DomainError(f"beta must have dimension p = {data.p}")
    mean = data.exposures * link.lam(data.design @ beta)
    y = data.counts
    return float(np.sum(y * np.log(mean) - mean - gammaln(y + 1.0)))


def initial_beta(
    init: Union[InitKind, list, np.ndarray, None], prior: GaussianPrior, rng: RngStream
) -> np.ndarray:
    """Resolve an init_beta setting to a starting vector."""
    if init is None or init == InitKind.PRIOR_DRAW:
        return prior.draw(rng)
    if init == InitKind.ZERO:
        return np.zeros(prior.p)
    beta = np.asarray(init, dtype=np.float64)
    if beta.shape != (prior.p,):
        raise DomainError(f"init_beta must have length {prior.p}")
    return beta


def initial_state(
    data: PoissonData, prior: GaussianPrior, rng: RngStream, init=InitKind.PRIOR_DRAW
) -> PoissonChainState:
    """beta from `init`, latents from one conditional pass given that beta."""
    beta = initial_beta(init, prior, rng)
    _check_dims(beta, data, prior)
    u, v, w = draw_latents(beta, data, rng)
    return PoissonChainState(beta=beta, u=u, v=v, w=w)


def run_chains(data: PoissonData, prior: GaussianPrior, config: SamplerConfig) -> DrawMatrix:
    """Run config.n_chains independent Gibbs chains and collect kept draws."""
    if prior.p != data.p:
        raise DomainError(f"prior dimension {prior.p} does not match design p = {data.p}")

    def _sweep(beta: np.ndarray, rng: RngStream):
        state = transition(beta, data, prior, rng)
        return state.beta, {"u": state.u, "v": state.v, "w": state.w}

    def _one(chain: int, rng: RngStream):
        start = initial_state(data, prior, rng, config.init_beta)
        return gibbs_chain(
            chain,
            rng,
            start.beta,
            _sweep,
            config.burn_in,
            config.keep,
            config.thin,
            store_latents=config.store_latents,
        )

    return run_chain_set(_one, config.n_chains, config.seed, "poisson-lambda", config.workers)


def predictive_means(
    draws: DrawMatrix, x_new: np.ndarray, exposure: float = 1.0, link_name: str = "lambda"
) -> np.ndarray:
    """n* g(x_new^T beta) for every stored draw, with g the lambda or exp link."""
    x_new = np.asarray(x_new, dtype=np.float64)
    if x_new.shape != (draws.p,):
        raise DomainError(f"x_new must have dimension p = {draws.p}")
    if exposure <= 0:
        raise DomainError("exposure must be > 0")
    eta = draws.beta @ x_new
    if link_name == "lambda":
        return exposure * np.asarray(link.lam(eta))
    if link_name == "exp":
        return exposure * np.exp(eta)
    raise DomainError(f"unknown link '{link_name}'")


def posterior_predictive_mean(
    draws: DrawMatrix, x_new: np.ndarray, exposure: float = 1.0, link_name: str = "lambda"
) -> Dict[str, object]:
    """Per-draw conditional means at x_new with their average and 95% band."""
    values = predictive_means(draws, x_new, exposure, link_name)
    return {
        "draws": values,
        "mean": float(values.mean()),
        "q025": float(np.quantile(values, 0.025)),
        "q975": float(np.quantile(values, 0.975)),
    }


def collapse_duplicates(data: PoissonData) -> PoissonData:
    """Merge rows with identical covariates, summing counts and exposures.

    The beta posterior is unchanged by the gamma and inverse-Gaussian
    reproductive properties. Row order follows first appearance.
    """
    groups: Dict[bytes, int] = {}
    order = []
    for i, row in enumerate(data.design):
        key = (row + 0.0).tobytes()
        if key not in groups:
            groups[key] = len(order)
            order.append(i)
    if len(order) == data.n:
        return data
    index = np.array([groups[(row + 0.0).tobytes()] for row in data.design])
    counts = np.bincount(index, weights=data.counts, minlength=len(order))
    exposures = np.bincount(index, weights=data.exposures, minlength=len(order))
    logger.info("Collapsed %d rows into %d distinct covariate rows", data.n, len(order))
    return PoissonData(data.design[order], np.rint(counts).astype(np.int64), exposures)


def simulate_counts(beta: np.ndarray, design: np.ndarray, exposures: np.ndarray, rng: RngStream) -> np.ndarray:
    """y_i ~ Po(n_i lambda(x_i^T beta))."""
    mean = exposures * np.asarray(link.lam(design @ beta))
    return sample_poisson(rng, mean)
