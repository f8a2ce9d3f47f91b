"""
Joint-distribution ("getting it right") tests of the posterior transition kernels.

Two simulators target the same joint law p(beta, y):

- marginal-conditional: beta ~ prior, y ~ p(y | beta), independently each time;
- successive-conditional: alternate one posterior transition beta | y with a
  fresh y ~ p(y | beta).

A correct kernel makes both produce the same moments of every test function
g(beta, y). Each function gets a z-score whose successive-side standard error
accounts for autocorrelation through the effective sample size.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy import stats

from ..baseline_explink import ETA_MAX, mh_transition
from ..config import GirSpec, ModelKind
from ..errors import DomainError
from ..multinomial_model import (
    MultinomialData,
    MultinomialDesign,
    transition as multinomial_transition,
    gibbs_sweep_bernoulli,
    simulate_counts as simulate_multinomial,
)
from ..poisson_model import GaussianPrior, PoissonData, transition as poisson_transition, simulate_counts
from ..rand_kernels import RngStream, cholesky_lower, sample_poisson
from .summary import MIN_ESS_LENGTH, effective_sample_size

logger = logging.getLogger(__name__)

DEFAULT_LEVEL = 0.01


@dataclass
class GirModel:
    """Everything the harness needs to simulate one model jointly.

    transition(beta, y, rng) must leave p(beta | y) invariant.
    """

    name: str
    prior: GaussianPrior
    simulate: Callable[[np.ndarray, RngStream], np.ndarray]
    transition: Callable[[np.ndarray, np.ndarray, RngStream], np.ndarray]

    def test_functions(self, beta: np.ndarray, y: np.ndarray) -> np.ndarray:
        y = y.astype(np.float64)
        return np.concatenate([beta, beta ** 2, y, y ** 2, np.outer(beta, y).ravel()])

    def test_names(self, p: int, n_y: int) -> List[str]:
        names = [f"beta_{k}" for k in range(p)]
        names += [f"beta_{k}^2" for k in range(p)]
        names += [f"y_{i}" for i in range(n_y)]
        names += [f"y_{i}^2" for i in range(n_y)]
        names += [f"beta_{k}*y_{i}" for k in range(p) for i in range(n_y)]
        return names


@dataclass
class GirRow:
    name: str
    marginal_mean: float
    successive_mean: float
    marginal_se: float
    successive_se: float
    z: float


@dataclass
class GirReport:
    model: str
    n_outer: int
    level: float = DEFAULT_LEVEL
    threshold: Optional[float] = None
    rows: List[GirRow] = field(default_factory=list)

    @property
    def critical_z(self) -> float:
        """Bonferroni two-sided critical |z| for the family of test functions, unless a threshold was given."""
        if self.threshold is not None:
            return self.threshold
        return float(stats.norm.ppf(1.0 - self.level / (2.0 * max(1, len(self.rows)))))

    @property
    def max_abs_z(self) -> float:
        return max((abs(r.z) for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        critical = self.critical_z
        return all(abs(r.z) <= critical for r in self.rows)


def _small_design(spec: GirSpec) -> np.ndarray:
    gen = np.random.default_rng(spec.design_seed)
    X = np.ones((spec.n, spec.p))
    if spec.p > 1:
        X[:, 1:] = gen.uniform(-1.0, 1.0, size=(spec.n, spec.p - 1))
    return X


def poisson_gir_model(spec: GirSpec = GirSpec()) -> GirModel:
    """n x p design with an intercept, exposures 1, prior N(0, I)."""
    X = _small_design(spec)
    exposures = np.ones(spec.n)
    prior = GaussianPrior.isotropic(spec.p)
    template = PoissonData(X, np.zeros(spec.n, dtype=np.int64), exposures)

    def _transition(beta, y, rng):
        return poisson_transition(beta, template.with_counts(y), prior, rng).beta

    return GirModel(
        name="poisson",
        prior=prior,
        simulate=lambda beta, rng: simulate_counts(beta, X, exposures, rng),
        transition=_transition,
    )


def _small_multinomial_design(spec: GirSpec, categories: int) -> MultinomialDesign:
    gen = np.random.default_rng(spec.design_seed)
    rows = spec.n * categories
    return MultinomialDesign(
        covariates=gen.normal(size=(rows, spec.p)),
        obs_index=np.repeat(np.arange(spec.n), categories),
        n_obs=spec.n,
    )


def _split_counts(design: MultinomialDesign, y: np.ndarray) -> MultinomialData:
    """y holds the n baseline counts followed by the flattened category counts."""
    return MultinomialData(design, y[: design.n_obs], y[design.n_obs:])


def multinomial_gir_model(spec: GirSpec = GirSpec(), bernoulli: bool = False) -> GirModel:
    categories = 1 if bernoulli else spec.categories
    trials = np.full(spec.n, 1 if bernoulli else spec.trials)
    design = _small_multinomial_design(spec, categories)
    prior = GaussianPrior.isotropic(spec.p)

    def _simulate(beta, rng):
        vectors = simulate_multinomial(beta, design, trials, rng)
        baseline = np.array([v[0] for v in vectors])
        rest = np.concatenate([v[1:] for v in vectors])
        return np.concatenate([baseline, rest])

    def _transition(beta, y, rng):
        data = _split_counts(design, y)
        if bernoulli:
            return gibbs_sweep_bernoulli(beta, data, prior, rng)
        return multinomial_transition(beta, data, prior, rng).beta

    return GirModel(
        name="bernoulli" if bernoulli else "multinomial",
        prior=prior,
        simulate=_simulate,
        transition=_transition,
    )


def explink_gir_model(spec: GirSpec = GirSpec(), step: float = 1.0, n_steps: int = 5) -> GirModel:
    """Exp-link model with a fixed prior-scaled random-walk kernel."""
    X = _small_design(spec)
    exposures = np.ones(spec.n)
    prior = GaussianPrior.isotropic(spec.p)
    template = PoissonData(X, np.zeros(spec.n, dtype=np.int64), exposures)
    factor = np.linalg.inv(cholesky_lower(prior.precision)).T

    def _simulate(beta, rng):
        return sample_poisson(rng, exposures * np.exp(np.clip(X @ beta, -ETA_MAX, ETA_MAX)))

    def _transition(beta, y, rng):
        return mh_transition(beta, template.with_counts(y), prior, rng, factor, step, n_steps)

    return GirModel(name="explink", prior=prior, simulate=_simulate, transition=_transition)


def gir_model_for(model: str, spec: GirSpec = GirSpec()) -> GirModel:
    """Look up a built-in harness model by name or ModelKind value."""
    builders: Dict[str, Callable[[], GirModel]] = {
        "poisson": lambda: poisson_gir_model(spec),
        ModelKind.POISSON_LAMBDA.value: lambda: poisson_gir_model(spec),
        "multinomial": lambda: multinomial_gir_model(spec),
        ModelKind.MULTINOMIAL_LAMBDA.value: lambda: multinomial_gir_model(spec),
        "bernoulli": lambda: multinomial_gir_model(spec, bernoulli=True),
        "explink": lambda: explink_gir_model(spec),
        ModelKind.POISSON_EXP.value: lambda: explink_gir_model(spec),
    }
    key = model.value if isinstance(model, ModelKind) else model
    if key not in builders:
        raise DomainError(f"unknown model '{model}'")
    return builders[key]()


def _successive_se(column: np.ndarray) -> float:
    n = column.shape[0]
    sd = column.std(ddof=1)
    if sd == 0:
        return 0.0
    if n < MIN_ESS_LENGTH:
        return sd / math.sqrt(n)
    return sd / math.sqrt(effective_sample_size(column))


def getting_it_right(
    model: GirModel,
    n_outer: int,
    rng: RngStream,
    threshold: Optional[float] = None,
    successive_rng: Optional[RngStream] = None,
    level: float = DEFAULT_LEVEL,
) -> GirReport:
    """Run both simulators for n_outer iterations and z-score every test function.

    The report passes when every |z| is within the Bonferroni critical value at
    `level` over all test functions, or within `threshold` when one is given.
    """
    report = GirReport(model=model.name, n_outer=n_outer, level=level, threshold=threshold)
    if n_outer <= 0:
        return report
    successive_rng = successive_rng or rng.spawn(rng.stream_id + 1)

    marginal = []
    for _ in range(n_outer):
        beta = model.prior.draw(rng)
        y = model.simulate(beta, rng)
        marginal.append(model.test_functions(beta, y))

    beta = model.prior.draw(successive_rng)
    y = model.simulate(beta, successive_rng)
    successive = []
    for t in range(n_outer):
        beta = model.transition(beta, y, successive_rng)
        y = model.simulate(beta, successive_rng)
        successive.append(model.test_functions(beta, y))
        if (t + 1) % 50_000 == 0:
            logger.info("%s: %d of %d successive-conditional steps", model.name, t + 1, n_outer)

    marginal = np.asarray(marginal)
    successive = np.asarray(successive)
    names = model.test_names(model.prior.p, y.shape[0])
    for j, name in enumerate(names):
        m_mean, s_mean = marginal[:, j].mean(), successive[:, j].mean()
        m_se = marginal[:, j].std(ddof=1) / math.sqrt(n_outer) if n_outer > 1 else 0.0
        s_se = _successive_se(successive[:, j]) if n_outer > 1 else 0.0
        scale = math.hypot(m_se, s_se)
        diff = m_mean - s_mean
        z = diff / scale if scale > 0 else (0.0 if diff == 0 else math.copysign(math.inf, diff))
        report.rows.append(GirRow(name, float(m_mean), float(s_mean), float(m_se), float(s_se), float(z)))
    logger.info(
        "%s getting-it-right: max |z| = %.2f over %d functions (critical %.2f)",
        model.name,
        report.max_abs_z,
        len(names),
        report.critical_z,
    )
    return report
