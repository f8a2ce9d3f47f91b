"""
Seeded random-variate generation for the samplers.

Rate parameterization is canonical: Ga(shape, rate) has kernel
x^(shape-1) exp(-rate x). Every function takes an RngStream and accepts
broadcastable array parameters, so one call draws a whole latent vector.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .errors import DomainError, NumericalError

IG_MEAN_FLOOR = 1e-300


@dataclass
class RngStream:
    """One independent random stream, identified by (seed, stream_id).

    Streams with the same pair replay the same sequence; distinct stream ids
    are spawned children of the same SeedSequence and are independent.
    A stream belongs to one chain at a time.
    """

    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise DomainError("seed and stream_id must be non-negative")
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def spawn(self, stream_id: int) -> "RngStream":
        """Return a sibling stream sharing this root seed."""
        return RngStream(self.seed, stream_id)


@dataclass(frozen=True)
class PrecisionGaussian:
    """N(precision^-1 shift, precision^-1), given in canonical form."""

    precision: np.ndarray
    shift: np.ndarray


def _positive(name: str, value) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be finite and > 0")
    return arr


def _unwrap(arr):
    arr = np.asarray(arr)
    return float(arr) if arr.ndim == 0 else arr


def sample_gamma(rng: RngStream, shape, rate, size=None):
    """Draw from Ga(shape, rate).

    numpy's generator uses the Marsaglia-Tsang squeeze, boosted by
    U^(1/shape) when shape < 1, so every shape > 0 is valid.
    """
    shape = _positive("shape", shape)
    rate = _positive("rate", rate)
    return _unwrap(rng.generator.gamma(shape, 1.0 / rate, size=size))


def sample_inverse_gaussian(rng: RngStream, mu, lam, size=None):
    """Draw from IGauss(mu, lam) by the Michael-Schucany-Haas transform.

    With y ~ chi^2_1 and r = mu y / (2 lam), the smaller root of the
    transformation is mu / (1 + r + sqrt(r (r + 2))), which is the usual
    mu + mu^2 y/(2 lam) - (mu/(2 lam)) sqrt(4 mu lam y + mu^2 y^2) without the
    cancellation. The root is kept with probability mu / (mu + x), otherwise
    mu^2 / x is returned.
    """
    mu = _positive("mu", mu)
    lam = _positive("lam", lam)
    if size is None:
        size = np.broadcast(mu, lam).shape
    gen = rng.generator
    y = np.square(gen.standard_normal(size))
    r = mu * y / (2.0 * lam)
    x = mu / (1.0 + r + np.sqrt(r * (r + 2.0)))
    keep = gen.uniform(size=size) * (mu + x) <= mu
    return _unwrap(np.where(keep, x, mu * (mu / x)))


def verify_ig_identity(rng: RngStream, kappa: float, n_draws: int) -> Tuple[float, float]:
    """Monte Carlo check of exp(-kappa) = E[exp(-zeta kappa^2 / 2)], zeta ~ Levy(0, 1).

    zeta = 1/z^2 with z standard normal has the Levy(0, 1) density
    (2 pi)^(-1/2) zeta^(-3/2) exp(-1/(2 zeta)).

    Returns:
        (estimate, standard error)
    """
    _positive("kappa", kappa)
    if n_draws < 10_000:
        raise DomainError("verify_ig_identity needs at least 10^4 draws")
    z = rng.generator.standard_normal(n_draws)
    with np.errstate(divide="ignore"):
        zeta = 1.0 / np.square(z)
    values = np.exp(-0.5 * zeta * kappa * kappa)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n_draws))


def cholesky_lower(precision: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of an SPD matrix.

    Raises:
        NumericalError: with the 1-based failing pivot when the matrix is not SPD
    """
    a = np.asarray(precision, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("precision must be a square matrix")
    if not np.all(np.isfinite(a)):
        raise NumericalError("precision has non-finite entries")
    factor, info = lapack.dpotrf(a, lower=1, clean=1)
    if info > 0:
        raise NumericalError(f"Cholesky failed at pivot {info}", pivot=int(info))
    if info < 0:
        raise NumericalError(f"dpotrf rejected argument {-info}")
    return factor


def gaussian_mean(g: PrecisionGaussian, factor: Optional[np.ndarray] = None) -> np.ndarray:
    """precision^-1 shift, by two triangular solves."""
    L = cholesky_lower(g.precision) if factor is None else factor
    half = solve_triangular(L, g.shift, lower=True)
    return solve_triangular(L, half, lower=True, trans="T")


def sample_mvn_precision(rng: RngStream, g: PrecisionGaussian) -> np.ndarray:
    """Draw from N(precision^-1 shift, precision^-1) without forming the inverse.

    precision = L L^T; the mean comes from two triangular solves and the
    noise from L^T x = z, z standard normal.
    """
    L = cholesky_lower(g.precision)
    mean = gaussian_mean(g, L)
    z = rng.generator.standard_normal(mean.shape[0])
    return mean + solve_triangular(L, z, lower=True, trans="T")


def sample_poisson(rng: RngStream, mean, size=None):
    """Poisson draw(s); used for data simulation."""
    mean = _positive("mean", mean)
    draws = rng.generator.poisson(mean, size=size)
    return int(draws) if np.ndim(draws) == 0 else draws


def sample_multinomial(rng: RngStream, trials: int, probs) -> np.ndarray:
    """Multinomial count vector over a probability simplex."""
    probs = np.asarray(probs, dtype=np.float64)
    if trials < 0:
        raise DomainError("trials must be non-negative")
    if np.any(probs < 0) or abs(math.fsum(probs) - 1.0) > 1e-12:
        raise DomainError("probs must be a simplex summing to 1 within 1e-12")
    if trials == 0:
        return np.zeros(probs.shape[0], dtype=np.int64)
    return rng.generator.multinomial(trials, probs)
