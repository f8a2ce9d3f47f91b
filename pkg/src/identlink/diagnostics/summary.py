"""
Chain summaries: effective sample size, Geweke z-scores and per-coordinate tables.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Any, Dict, List

import numpy as np

from ..draws import DrawMatrix
from ..errors import DegenerateChainWarning, DomainError, LowPowerWarning

logger = logging.getLogger(__name__)

GEWEKE_FIRST = 0.1
GEWEKE_LAST = 0.5
MIN_ESS_LENGTH = 10


def autocorrelation(chain: np.ndarray) -> np.ndarray:
    """Sample autocorrelation at every lag, computed by FFT."""
    x = np.asarray(chain, dtype=np.float64)
    n = x.shape[0]
    centered = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centered, n=size)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), n=size)[:n] / n
    return acov / acov[0]


def integrated_autocorrelation_time(chain: np.ndarray) -> float:
    """Geyer's initial monotone sequence estimate of the integrated autocorrelation time.

    Sums of adjacent autocorrelation pairs are truncated at the first
    non-positive pair and forced to be non-increasing.
    """
    x = np.asarray(chain, dtype=np.float64)
    if np.ptp(x) == 0:
        return math.nan
    rho = autocorrelation(x)
    n_pairs = rho.shape[0] // 2
    pairs = rho[0:2 * n_pairs:2] + rho[1:2 * n_pairs:2]
    negative = np.nonzero(pairs <= 0)[0]
    if negative.size:
        pairs = pairs[:negative[0]]
    pairs = np.minimum.accumulate(pairs)
    return float(max(-1.0 + 2.0 * pairs.sum(), 1.0 / x.shape[0]))


def effective_sample_size(draws: np.ndarray) -> float:
    """ESS = n / tau with tau from the initial monotone sequence, capped at n.

    A constant sequence has ESS n and triggers a DegenerateChainWarning.
    """
    x = np.asarray(draws, dtype=np.float64)
    n = x.shape[0]
    if n < MIN_ESS_LENGTH:
        raise DomainError(f"effective_sample_size needs at least {MIN_ESS_LENGTH} draws, got {n}")
    tau = integrated_autocorrelation_time(x)
    if math.isnan(tau):
        warnings.warn("constant chain; ESS set to its length", DegenerateChainWarning, stacklevel=2)
        return float(n)
    return float(min(n / tau, n))


def _segment_variance(segment: np.ndarray) -> float:
    """Spectral density at frequency zero over n, i.e. the variance of the segment mean."""
    var = segment.var(ddof=1)
    if var == 0:
        return 0.0
    return var * integrated_autocorrelation_time(segment) / segment.shape[0]


def geweke_z(draws: np.ndarray) -> float:
    """Compare the mean of the first 10% with the mean of the last 50%."""
    x = np.asarray(draws, dtype=np.float64)
    n = x.shape[0]
    n_first = int(GEWEKE_FIRST * n)
    n_last = int(GEWEKE_LAST * n)
    if n_first < MIN_ESS_LENGTH:
        raise DomainError(f"geweke_z needs at least {int(MIN_ESS_LENGTH / GEWEKE_FIRST)} draws, got {n}")
    first, last = x[:n_first], x[n - n_last:]
    diff = first.mean() - last.mean()
    scale = math.sqrt(_segment_variance(first) + _segment_variance(last))
    if scale == 0:
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return float(diff / scale)


@dataclass
class ChainSummary:
    """Per-coordinate posterior summary across all chains of a DrawMatrix."""

    names: List[str]
    mean: np.ndarray
    sd: np.ndarray
    q025: np.ndarray
    q50: np.ndarray
    q975: np.ndarray
    ess: np.ndarray
    mcse: np.ndarray
    geweke: np.ndarray
    degenerate: np.ndarray
    n_draws: int

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "parameter": name,
                "mean": float(self.mean[k]),
                "sd": float(self.sd[k]),
                "q2.5": float(self.q025[k]),
                "q50": float(self.q50[k]),
                "q97.5": float(self.q975[k]),
                "ess": float(self.ess[k]),
                "mcse": float(self.mcse[k]),
                "geweke_z": float(self.geweke[k]),
            }
            for k, name in enumerate(self.names)
        ]


def summarize(draws: DrawMatrix) -> ChainSummary:
    """Mean, SD, quantiles, ESS, MCSE and Geweke z of every coefficient.

    ESS is summed over chains; the Geweke entry is the chain with the largest
    |z|. Chains too short for a Geweke comparison give NaN there.
    """
    if draws.n_rows < MIN_ESS_LENGTH:
        raise DomainError(f"summarize needs at least {MIN_ESS_LENGTH} draws")
    beta = draws.beta
    p = draws.p
    ess = np.zeros(p)
    geweke = np.full(p, np.nan)
    degenerate = np.zeros(p, dtype=bool)
    for k in range(p):
        total = 0.0
        worst = np.nan
        for chain in draws.chain_ids:
            column = draws.for_chain(chain)[:, k]
            if column.shape[0] < MIN_ESS_LENGTH:
                continue
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                total += effective_sample_size(column)
            if any(issubclass(w.category, DegenerateChainWarning) for w in caught):
                degenerate[k] = True
            if column.shape[0] * GEWEKE_FIRST >= MIN_ESS_LENGTH:
                z = geweke_z(column)
                if np.isnan(worst) or abs(z) > abs(worst):
                    worst = z
        ess[k] = total if total > 0 else float(beta.shape[0])
        geweke[k] = worst
    if np.any(np.isnan(geweke)):
        warnings.warn("chains too short for Geweke diagnostics", LowPowerWarning, stacklevel=2)
    sd = beta.std(axis=0, ddof=1)
    q025, q50, q975 = np.quantile(beta, [0.025, 0.5, 0.975], axis=0)
    return ChainSummary(
        names=[f"beta_{k}" for k in range(p)],
        mean=beta.mean(axis=0),
        sd=sd,
        q025=q025,
        q50=q50,
        q975=q975,
        ess=ess,
        mcse=sd / np.sqrt(ess),
        geweke=geweke,
        degenerate=degenerate,
        n_draws=draws.n_rows,
    )
