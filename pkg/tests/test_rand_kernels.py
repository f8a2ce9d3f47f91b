import math

import numpy as np
import pytest
from scipy import stats

from conftest import MC_Z, mc_z
from identlink import (
    DomainError,
    NumericalError,
    PrecisionGaussian,
    RngStream,
    sample_gamma,
    sample_inverse_gaussian,
    sample_multinomial,
    sample_mvn_precision,
    verify_ig_identity,
)
from identlink.rand_kernels import cholesky_lower, sample_poisson


def _mean_within(draws, expected):
    se = draws.std(ddof=1) / math.sqrt(draws.shape[0])
    assert abs(draws.mean() - expected) <= MC_Z * se


def _ks_critical(n, alpha=0.01):
    return stats.kstwo.ppf(1 - alpha, n)


def test_streams_reproduce_and_differ():
    a = RngStream(5, 1).generator.standard_normal(10)
    b = RngStream(5, 1).generator.standard_normal(10)
    c = RngStream(5, 2).generator.standard_normal(10)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_spawn_shares_root_seed():
    parent = RngStream(9, 0)
    child = parent.spawn(3)
    assert (child.seed, child.stream_id) == (9, 3)


def test_gamma_moments(rng):
    _mean_within(sample_gamma(rng, 1.0, 2.0, size=1_000_000), 0.5)
    draws = sample_gamma(rng, 5.0, 1.0, size=1_000_000)
    # variance of the sample variance for Ga(5, 1): (mu4 - sigma^4) / n
    sigma2 = 5.0
    mu4 = 3 * 5.0 * (5.0 + 2)
    se = math.sqrt((mu4 - sigma2 ** 2) / draws.shape[0])
    assert abs(draws.var(ddof=1) - sigma2) <= MC_Z * se


def test_gamma_reproducible():
    first = sample_gamma(RngStream(1), 2.0, 3.0, size=10)
    second = sample_gamma(RngStream(1), 2.0, 3.0, size=10)
    np.testing.assert_array_equal(first, second)


def test_gamma_small_shape_is_positive(rng):
    draws = sample_gamma(rng, 0.05, 1.0, size=10_000)
    assert np.all(draws >= 0)
    _mean_within(draws, 0.05)


def test_gamma_ks(rng):
    draws = sample_gamma(rng, 2.5, 1.7, size=100_000)
    result = stats.kstest(draws, stats.gamma(a=2.5, scale=1 / 1.7).cdf)
    assert result.statistic <= _ks_critical(draws.shape[0])


@pytest.mark.parametrize("shape, rate", [(0.0, 1.0), (1.0, -2.0), (math.nan, 1.0)])
def test_gamma_domain(rng, shape, rate):
    with pytest.raises(DomainError):
        sample_gamma(rng, shape, rate)


def test_inverse_gaussian_mean(rng):
    _mean_within(sample_inverse_gaussian(rng, 1.0, 1.0, size=1_000_000), 1.0)


def test_inverse_gaussian_variance(rng):
    draws = sample_inverse_gaussian(rng, 2.0, 4.0, size=1_000_000)
    # batch the squared deviations to get an SE for the variance
    dev = (draws - 2.0) ** 2
    se = dev.std(ddof=1) / math.sqrt(dev.shape[0])
    assert abs(dev.mean() - 2.0) <= MC_Z * se


def test_inverse_gaussian_support(rng):
    assert np.all(sample_inverse_gaussian(rng, 0.5, 1.0, size=100_000) > 0)


def test_inverse_gaussian_ks(rng):
    mu, lam = 1.3, 0.8
    draws = sample_inverse_gaussian(rng, mu, lam, size=100_000)

    def cdf(x):
        r = np.sqrt(lam / x)
        return stats.norm.cdf(r * (x / mu - 1)) + np.exp(2 * lam / mu) * stats.norm.cdf(-r * (x / mu + 1))

    result = stats.kstest(draws, cdf)
    assert result.statistic <= _ks_critical(draws.shape[0])


def test_inverse_gaussian_tiny_mean(rng):
    draws = sample_inverse_gaussian(rng, np.full(1000, 1e-300), 1.0)
    assert np.all(np.isfinite(draws)) and np.all(draws > 0)


def test_inverse_gaussian_domain(rng):
    with pytest.raises(DomainError):
        sample_inverse_gaussian(rng, 0.0, 1.0)
    with pytest.raises(DomainError):
        sample_inverse_gaussian(rng, 1.0, -1.0)


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
def test_ig_identity(rng, kappa):
    estimate, se = verify_ig_identity(rng, kappa, 1_000_000)
    assert abs(estimate - math.exp(-kappa)) <= MC_Z * se


def test_ig_identity_needs_draws(rng):
    with pytest.raises(DomainError):
        verify_ig_identity(rng, 1.0, 100)


def test_mvn_identity(rng):
    g = PrecisionGaussian(np.eye(2), np.zeros(2))
    draws = np.array([sample_mvn_precision(rng, g) for _ in range(100_000)])
    se = 1 / math.sqrt(draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0)) <= mc_z(2) * se)
    np.testing.assert_allclose(np.cov(draws.T), np.eye(2), atol=mc_z(3) * math.sqrt(2) * se)


def test_mvn_diagonal(rng):
    g = PrecisionGaussian(np.diag([4.0, 1.0]), np.array([4.0, 0.0]))
    draws = np.array([sample_mvn_precision(rng, g) for _ in range(50_000)])
    np.testing.assert_allclose(draws.mean(axis=0), [1.0, 0.0], atol=0.02)
    np.testing.assert_allclose(draws.var(axis=0), [0.25, 1.0], rtol=0.03)


def test_mvn_matches_covariance_sampling(rng):
    precision = np.array([[2.0, 0.5, 0.1], [0.5, 1.5, -0.3], [0.1, -0.3, 1.0]])
    shift = np.array([1.0, -1.0, 0.5])
    covariance = np.linalg.inv(precision)
    mean = covariance @ shift
    draws = np.array([sample_mvn_precision(rng, PrecisionGaussian(precision, shift)) for _ in range(50_000)])
    se = np.sqrt(np.diag(covariance) / draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0) - mean) <= mc_z(3) * se)
    np.testing.assert_allclose(np.cov(draws.T), covariance, atol=0.03)


def test_mvn_reproducible():
    g = PrecisionGaussian(np.diag([2.0, 3.0]), np.array([1.0, 1.0]))
    np.testing.assert_array_equal(sample_mvn_precision(RngStream(4), g), sample_mvn_precision(RngStream(4), g))


def test_cholesky_failure_reports_pivot():
    with pytest.raises(NumericalError) as info:
        cholesky_lower(np.array([[1.0, 0.0], [0.0, -1.0]]))
    assert info.value.pivot == 2


def test_poisson_mean(rng):
    draws = sample_poisson(rng, 3.0, size=1_000_000)
    _mean_within(draws.astype(float), 3.0)


def test_multinomial_edges(rng):
    np.testing.assert_array_equal(sample_multinomial(rng, 0, [0.3, 0.7]), [0, 0])
    np.testing.assert_array_equal(sample_multinomial(rng, 10, [1.0, 0.0]), [10, 0])
    with pytest.raises(DomainError):
        sample_multinomial(rng, 3, [0.5, 0.6])
