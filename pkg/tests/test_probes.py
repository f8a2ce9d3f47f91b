import math

import numpy as np
import pytest
from scipy import stats

from conftest import MC_Z
from identlink import DomainError, GaussianPrior, LowPowerWarning, PoissonData, RngStream
from identlink.diagnostics import (
    DriftPoint,
    DriftReport,
    HFunction,
    empirical_drift,
    lemma4_bound_test,
    rescaled_ig_latents,
    uhat_invariance_test,
    uhat_marginal_test,
    uhat_samples,
)

BETA = np.array([0.5, 1.0])


def test_uhat_is_unit_exponential_for_single_counts(rng):
    data = PoissonData([[1.0, 2.0]], [1])
    samples = uhat_samples(data, BETA, 50_000, rng)[:, 0]
    result = stats.kstest(samples, stats.expon.cdf)
    assert result.statistic <= stats.kstwo.ppf(0.99, samples.shape[0])


def test_marginal_test_skips_zero_counts(small_poisson, rng):
    report = uhat_marginal_test(small_poisson, BETA, 20_000, rng)
    assert report.skipped == [1]
    assert [r.obs_index for r in report.rows] == [0, 2, 3]
    assert [r.y for r in report.rows] == [1, 2, 3]
    assert report.passed
    assert not report.low_power


def test_marginal_test_low_power(small_poisson, rng):
    with pytest.warns(LowPowerWarning):
        report = uhat_marginal_test(small_poisson, BETA, 500, rng)
    assert report.low_power


def test_marginal_test_rejects_bad_beta(small_poisson, rng):
    with pytest.raises(DomainError):
        uhat_marginal_test(small_poisson, np.array([math.inf, 0.0]), 2_000, rng)


def test_invariance_across_beta(small_poisson, rng):
    points = [np.zeros(2), np.array([3.0, -4.0]), np.array([-20.0, 15.0])]
    report = uhat_invariance_test(small_poisson, points, 20_000, rng)
    assert len(report.rows) == 6
    assert report.rows[-1].comparison == "point 0 vs point 2"
    assert report.passed


def test_invariance_needs_two_points(small_poisson, rng):
    with pytest.raises(DomainError):
        uhat_invariance_test(small_poisson, [np.zeros(2)], 2_000, rng)


def test_rescaled_latent_is_standard_normal_in_square(small_poisson, rng):
    t = rescaled_ig_latents(small_poisson, BETA, 2, 200_000, rng)
    squared = np.square(t)
    se = squared.std(ddof=1) / math.sqrt(squared.shape[0])
    assert abs(squared.mean() - 1.0) <= MC_Z * se


@pytest.mark.parametrize("h", list(HFunction))
@pytest.mark.parametrize("beta", [np.zeros(2), BETA, np.array([-6.0, 9.0])])
def test_bounds_hold(small_poisson, rng, h, beta):
    result = lemma4_bound_test(small_poisson, beta, 3, h, 100_000, rng)
    assert result.holds
    assert result.h == h


def test_bound_constants(small_poisson, rng):
    rhs = {h: lemma4_bound_test(small_poisson, BETA, 0, h.value, 100, rng).rhs for h in HFunction}
    assert rhs[HFunction.SQUARE] == 2.0
    assert rhs[HFunction.ABS] == pytest.approx(2 * math.sqrt(2 / math.pi))
    assert rhs[HFunction.FOURTH] == 6.0


def test_bound_domain(small_poisson, rng):
    with pytest.raises(DomainError):
        lemma4_bound_test(small_poisson, BETA, 1, HFunction.SQUARE, 100, rng)
    with pytest.raises(DomainError):
        lemma4_bound_test(small_poisson, BETA, 4, HFunction.SQUARE, 100, rng)
    with pytest.raises(DomainError):
        lemma4_bound_test(small_poisson, BETA, 0, HFunction.SQUARE, 1, rng)
    with pytest.raises(ValueError):
        lemma4_bound_test(small_poisson, BETA, 0, "cube", 100, rng)


def test_drift_point_ratio():
    assert math.isnan(DriftPoint(norm=0.0, direction=0, beta=np.zeros(2), energy=0.0, pv=1.0, se=0.1).ratio)
    point = DriftPoint(norm=2.0, direction=0, beta=np.array([2.0, 0.0]), energy=4.0, pv=2.0, se=0.4)
    assert point.ratio == 0.5
    assert point.ratio_se == pytest.approx(0.1)


def test_drift_report_requires_clean_points():
    ok = DriftPoint(norm=5.0, direction=0, beta=np.zeros(2), energy=25.0, pv=5.0, se=0.5)
    failed = DriftPoint(norm=5.0, direction=1, beta=np.zeros(2), energy=25.0, error="Cholesky failed")
    assert DriftReport(n_mc=10, rao_blackwell=False, points=[ok]).contracts_at_largest_norm()
    assert not DriftReport(n_mc=10, rao_blackwell=False, points=[ok, failed]).contracts_at_largest_norm()
    assert not DriftReport(n_mc=10, rao_blackwell=False).contracts_at_largest_norm()


@pytest.mark.parametrize("grid", [[], [-1.0, 2.0], [5.0, 5.0], [10.0, 1.0]])
def test_drift_grid_validation(drift_data, grid):
    with pytest.raises(DomainError):
        empirical_drift(drift_data, GaussianPrior.isotropic(2), grid, 1, 10, RngStream(1))


def test_drift_prior_dimension(drift_data):
    with pytest.raises(DomainError):
        empirical_drift(drift_data, GaussianPrior.isotropic(3), [1.0], 1, 10, RngStream(1))


def test_drift_at_origin(drift_data):
    report = empirical_drift(drift_data, GaussianPrior.isotropic(2), [0.0, 1.0], 2, 200, RngStream(3))
    origin = report.at_norm(0.0)
    assert len(origin) == 2
    assert all(p.energy == 0.0 and p.pv > 0 and math.isnan(p.ratio) for p in origin)
    assert math.isnan(report.mean_ratios()[0.0])


def test_drift_contracts_far_out(drift_data):
    report = empirical_drift(drift_data, GaussianPrior.isotropic(2), [10.0, 1000.0], 4, 2_000, RngStream(7))
    assert report.contracts_at_largest_norm()
    assert all(p.error is None for p in report.points)


def test_rao_blackwell_agrees(drift_data):
    prior = GaussianPrior.isotropic(2)
    plain = empirical_drift(drift_data, prior, [10.0], 1, 4_000, RngStream(5)).points[0]
    smoothed = empirical_drift(drift_data, prior, [10.0], 1, 4_000, RngStream(5), rao_blackwell=True).points[0]
    np.testing.assert_allclose(plain.beta, smoothed.beta)
    assert abs(plain.pv - smoothed.pv) <= MC_Z * math.hypot(plain.se, smoothed.se)


@pytest.mark.slow
def test_drift_contracts_with_many_replicates(drift_data):
    report = empirical_drift(drift_data, GaussianPrior.isotropic(2), [0.0, 10.0, 100.0, 1000.0], 4, 10_000, RngStream(7))
    assert report.contracts_at_largest_norm()
    assert all(report.mean_ratios()[r] < 1.0 for r in (100.0, 1000.0))


@pytest.mark.slow
def test_rescaled_latent_law_at_full_size(drift_data):
    rng = RngStream(31)
    directions = rng.generator.standard_normal((2, drift_data.p))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    points = [np.zeros(drift_data.p)] + [r * d for r in (3.0, 30.0) for d in directions]
    for beta in points:
        assert uhat_marginal_test(drift_data, beta, 100_000, rng).passed
    report = uhat_invariance_test(drift_data, points, 100_000, rng)
    assert len(report.rows) == drift_data.n * (len(points) - 1)
    assert report.passed
