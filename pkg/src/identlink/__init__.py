"""
identlink: Bayesian Poisson and multinomial regression under the
approximate-identity link lambda(xi) = (xi + sqrt(xi^2 + 4)) / 2.

This package contains:
- link: the link function and its coefficients b(xi), s(xi)
- rand_kernels: seeded gamma, inverse-Gaussian and Gaussian samplers
- poisson_model / multinomial_model: data-augmentation Gibbs samplers
- baseline_explink: adaptive Metropolis for the exp-link comparison model
- diagnostics: chain summaries, kernel tests and Monte Carlo probes
"""

from .config import (
    GirSpec,
    InitKind,
    MhConfig,
    ModelKind,
    SamplerConfig,
)

from .errors import (
    ClampWarning,
    DegenerateChainWarning,
    DomainError,
    IdentlinkError,
    LowPowerWarning,
    NumericalError,
    ParseError,
)

from .link import (
    LinkValue,
    b_coeff,
    lam,
    lambda_inv,
    link_curve,
    link_value,
    s_coeff,
)

from .rand_kernels import (
    PrecisionGaussian,
    RngStream,
    sample_gamma,
    sample_inverse_gaussian,
    sample_multinomial,
    sample_mvn_precision,
    verify_ig_identity,
)

from .draws import (
    ChainRecord,
    DrawMatrix,
)

from .poisson_model import (
    GaussianPrior,
    PoissonChainState,
    PoissonData,
    collapse_duplicates,
    gibbs_sweep,
    log_likelihood,
    posterior_predictive_mean,
    run_chains,
)

from .multinomial_model import (
    MultinomialChainState,
    MultinomialData,
    MultinomialDesign,
    build_polychotomous_design,
    category_probs,
    gibbs_sweep_bernoulli,
    gibbs_sweep_multinomial,
    multinomial_log_likelihood,
    run_multinomial_chains,
)

from .baseline_explink import (
    explink_log_posterior,
    explink_log_posterior_grad,
    explink_mode,
    run_mh_chain,
)

__version__ = "1.0.0"
__all__ = [
    'GirSpec',
    'InitKind',
    'MhConfig',
    'ModelKind',
    'SamplerConfig',
    'ClampWarning',
    'DegenerateChainWarning',
    'DomainError',
    'IdentlinkError',
    'LowPowerWarning',
    'NumericalError',
    'ParseError',
    'LinkValue',
    'b_coeff',
    'lam',
    'lambda_inv',
    'link_curve',
    'link_value',
    's_coeff',
    'PrecisionGaussian',
    'RngStream',
    'sample_gamma',
    'sample_inverse_gaussian',
    'sample_multinomial',
    'sample_mvn_precision',
    'verify_ig_identity',
    'ChainRecord',
    'DrawMatrix',
    'GaussianPrior',
    'PoissonChainState',
    'PoissonData',
    'collapse_duplicates',
    'gibbs_sweep',
    'log_likelihood',
    'posterior_predictive_mean',
    'run_chains',
    'MultinomialChainState',
    'MultinomialData',
    'MultinomialDesign',
    'build_polychotomous_design',
    'category_probs',
    'gibbs_sweep_bernoulli',
    'gibbs_sweep_multinomial',
    'multinomial_log_likelihood',
    'run_multinomial_chains',
    'explink_log_posterior',
    'explink_log_posterior_grad',
    'explink_mode',
    'run_mh_chain',
]
