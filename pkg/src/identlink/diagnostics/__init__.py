"""
Diagnostics for identlink chains and kernels.

- summary: ESS, Geweke z-scores and per-coordinate summaries
- getting_it_right: joint-distribution tests of the transition kernels
- probes: Monte Carlo checks of the latent laws and the drift of V(beta)
"""

from .summary import (
    ChainSummary,
    autocorrelation,
    effective_sample_size,
    geweke_z,
    integrated_autocorrelation_time,
    summarize,
)

from .getting_it_right import (
    GirModel,
    GirReport,
    GirRow,
    explink_gir_model,
    getting_it_right,
    gir_model_for,
    multinomial_gir_model,
    poisson_gir_model,
)

from .probes import (
    BoundResult,
    DriftPoint,
    DriftReport,
    HFunction,
    KsReport,
    KsRow,
    empirical_drift,
    lemma4_bound_test,
    rescaled_ig_latents,
    uhat_invariance_test,
    uhat_marginal_test,
    uhat_samples,
)

__all__ = [
    'ChainSummary',
    'autocorrelation',
    'effective_sample_size',
    'geweke_z',
    'integrated_autocorrelation_time',
    'summarize',
    'GirModel',
    'GirReport',
    'GirRow',
    'explink_gir_model',
    'getting_it_right',
    'gir_model_for',
    'multinomial_gir_model',
    'poisson_gir_model',
    'BoundResult',
    'DriftPoint',
    'DriftReport',
    'HFunction',
    'KsReport',
    'KsRow',
    'empirical_drift',
    'lemma4_bound_test',
    'rescaled_ig_latents',
    'uhat_invariance_test',
    'uhat_marginal_test',
    'uhat_samples',
]
