"""
Exponential-link Poisson regression, sampled by adaptive random-walk Metropolis.

This is the comparison model for the lambda-link sampler:

    gamma ~ N_p(mu, Psi^-1),   y_i ~ Po(n_i exp(x_i^T gamma))

Proposals are gamma' = gamma + step * L z where L L^T is the inverse of the
negative Hessian at the posterior mode. log(step) is tuned toward the target
acceptance rate by Robbins-Monro, once per adapt_window sweeps, during
burn-in only; the kernel is fixed for every kept draw.
"""

import logging
import math
import warnings
from typing import Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from .config import MhConfig
from .draws import ChainRecord, DrawMatrix, run_chain_set
from .errors import ClampWarning, DomainError, NumericalError
from .poisson_model import GaussianPrior, PoissonData, initial_beta
from .rand_kernels import RngStream, cholesky_lower

logger = logging.getLogger(__name__)

ETA_MAX = 700.0


def _eta(gamma: np.ndarray, data: PoissonData) -> Tuple[np.ndarray, bool]:
    eta = data.design @ gamma
    clamped = bool(np.any(eta > ETA_MAX))
    return np.minimum(eta, ETA_MAX), clamped


def _log_posterior(gamma: np.ndarray, data: PoissonData, prior: GaussianPrior) -> Tuple[float, bool]:
    eta, clamped = _eta(gamma, data)
    y, n = data.counts, data.exposures
    loglik = np.sum(y * eta + y * np.log(n) - n * np.exp(eta) - gammaln(y + 1.0))
    diff = gamma - prior.mean
    return float(loglik - 0.5 * diff @ prior.precision @ diff), clamped


def explink_log_posterior(gamma: np.ndarray, data: PoissonData, prior: GaussianPrior) -> float:
    """Log posterior of the exp-link model up to its normalizing constant.

    Linear predictors above 700 are clamped and a ClampWarning is issued.
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    if gamma.shape != (data.p,) or not np.all(np.isfinite(gamma)):
        raise DomainError(f"gamma must be a finite vector of length {data.p}")
    value, clamped = _log_posterior(gamma, data, prior)
    if clamped:
        warnings.warn(f"linear predictor clamped at {ETA_MAX}", ClampWarning, stacklevel=2)
    return value


def explink_log_posterior_grad(gamma: np.ndarray, data: PoissonData, prior: GaussianPrior) -> np.ndarray:
    """X^T (y - n exp(eta)) - Psi (gamma - mu)."""
    gamma = np.asarray(gamma, dtype=np.float64)
    eta, _ = _eta(gamma, data)
    resid = data.counts - data.exposures * np.exp(eta)
    return data.design.T @ resid - prior.precision @ (gamma - prior.mean)


def explink_mode(data: PoissonData, prior: GaussianPrior) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mode and the negative Hessian there."""
    start = np.linalg.lstsq(data.design, np.log((data.counts + 0.5) / data.exposures), rcond=None)[0]

    def _objective(g):
        return -_log_posterior(g, data, prior)[0], -explink_log_posterior_grad(g, data, prior)

    result = minimize(_objective, start, jac=True, method="BFGS")
    if not result.success:
        logger.warning("Mode search did not converge: %s", result.message)
    mode = result.x
    eta, _ = _eta(mode, data)
    weights = data.exposures * np.exp(eta)
    hessian = prior.precision + (data.design.T * weights) @ data.design
    return mode, hessian


def _proposal_factor(hessian: np.ndarray) -> np.ndarray:
    """L with L L^T = hessian^-1."""
    L_h = cholesky_lower(hessian)
    return np.linalg.inv(L_h).T


def run_mh_chain(data: PoissonData, prior: GaussianPrior, config: MhConfig) -> DrawMatrix:
    """Adaptive random-walk Metropolis chains for the exp-link posterior."""
    if prior.p != data.p:
        raise DomainError(f"prior dimension {prior.p} does not match design p = {data.p}")
    mode, hessian = explink_mode(data, prior)
    try:
        factor = _proposal_factor(hessian)
    except NumericalError:
        factor = np.eye(data.p)
    initial_step = config.initial_step or 2.38 / math.sqrt(data.p)

    def _one(chain: int, rng: RngStream) -> ChainRecord:
        init = config.init_beta
        start = mode.copy() if init is None else initial_beta(init, prior, rng)
        return _mh_chain(chain, rng, start, data, prior, factor, initial_step, config)

    return run_chain_set(_one, config.n_chains, config.seed, "poisson-exp", config.workers)


def _mh_chain(
    chain: int,
    rng: RngStream,
    start: np.ndarray,
    data: PoissonData,
    prior: GaussianPrior,
    factor: np.ndarray,
    initial_step: float,
    config: MhConfig,
) -> ChainRecord:
    gen = rng.generator
    gamma = start
    current, _ = _log_posterior(gamma, data, prior)
    log_step = math.log(initial_step)
    window_accepts = 0
    n_windows = 0
    kept_accepts = 0
    n_clamped = 0

    out = np.empty((config.keep, data.p))
    sweeps = np.empty(config.keep, dtype=np.int64)
    steps = np.empty(config.keep)
    row = 0
    for t in range(1, config.total_sweeps + 1):
        step = math.exp(log_step)
        proposal = gamma + step * (factor @ gen.standard_normal(data.p))
        candidate, clamped = _log_posterior(proposal, data, prior)
        n_clamped += int(clamped)
        accepted = -gen.standard_exponential() < candidate - current
        if accepted:
            gamma, current = proposal, candidate

        if t <= config.burn_in:
            window_accepts += int(accepted)
            if t % config.adapt_window == 0:
                n_windows += 1
                rate = window_accepts / config.adapt_window
                log_step += (rate - config.target_accept) / n_windows ** 0.6
                window_accepts = 0
        else:
            kept_accepts += int(accepted)
            if (t - config.burn_in) % config.thin == 0:
                out[row] = gamma
                sweeps[row] = t
                steps[row] = step
                row += 1

    acceptance = kept_accepts / (config.keep * config.thin)
    logger.info("Chain %d acceptance %.3f with step %.4g", chain, acceptance, math.exp(log_step))
    if n_clamped:
        logger.warning("Chain %d clamped the linear predictor %d times", chain, n_clamped)
    return ChainRecord(
        chain=chain,
        beta=out,
        sweep=sweeps,
        acceptance=acceptance,
        step_size=steps,
        n_clamped=n_clamped,
    )


def mh_transition(
    gamma: np.ndarray,
    data: PoissonData,
    prior: GaussianPrior,
    rng: RngStream,
    factor: np.ndarray,
    step: float,
    n_steps: int = 1,
) -> np.ndarray:
    """Fixed-kernel Metropolis steps, used by the getting-it-right harness."""
    gen = rng.generator
    current, _ = _log_posterior(gamma, data, prior)
    for _ in range(n_steps):
        proposal = gamma + step * (factor @ gen.standard_normal(data.p))
        candidate, _ = _log_posterior(proposal, data, prior)
        if -gen.standard_exponential() < candidate - current:
            gamma, current = proposal, candidate
    return gamma
