"""
Stored coefficient draws and the multi-chain runner shared by all samplers.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .errors import NumericalError
from .rand_kernels import RngStream

logger = logging.getLogger(__name__)


@dataclass
class ChainRecord:
    """Output of a single chain before it is merged into a DrawMatrix."""

    chain: int
    beta: np.ndarray
    sweep: np.ndarray
    acceptance: Optional[float] = None
    step_size: Optional[np.ndarray] = None
    latents: Optional[List[Dict[str, np.ndarray]]] = None
    n_clamped: int = 0


@dataclass
class DrawMatrix:
    """Post-burn-in coefficient draws of one or more chains.

    Rows are ordered by chain, then sweep. `sweep` is the 1-based sweep
    index within the chain (burn-in included).
    """

    beta: np.ndarray
    chain: np.ndarray
    sweep: np.ndarray
    seed: Optional[int] = None
    model: str = ""
    acceptance: Dict[int, float] = field(default_factory=dict)
    step_size: Optional[np.ndarray] = None
    latents: Optional[List[Dict[str, np.ndarray]]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.beta = np.atleast_2d(np.asarray(self.beta, dtype=np.float64))
        self.chain = np.asarray(self.chain, dtype=np.int64)
        self.sweep = np.asarray(self.sweep, dtype=np.int64)

    @property
    def n_rows(self) -> int:
        return self.beta.shape[0]

    @property
    def p(self) -> int:
        return self.beta.shape[1]

    @property
    def chain_ids(self) -> List[int]:
        return sorted(set(self.chain.tolist()))

    def for_chain(self, chain: int) -> np.ndarray:
        return self.beta[self.chain == chain]

    @classmethod
    def from_records(cls, records: List[ChainRecord], seed: Optional[int], model: str) -> "DrawMatrix":
        records = sorted(records, key=lambda r: r.chain)
        beta = np.vstack([r.beta for r in records])
        chain = np.concatenate([np.full(r.beta.shape[0], r.chain) for r in records])
        sweep = np.concatenate([r.sweep for r in records])
        step_size = None
        if all(r.step_size is not None for r in records):
            step_size = np.concatenate([r.step_size for r in records])
        latents = None
        if all(r.latents is not None for r in records):
            latents = [entry for r in records for entry in r.latents]
        acceptance = {r.chain: r.acceptance for r in records if r.acceptance is not None}
        metadata = {"n_clamped": sum(r.n_clamped for r in records)}
        return cls(
            beta=beta,
            chain=chain,
            sweep=sweep,
            seed=seed,
            model=model,
            acceptance=acceptance,
            step_size=step_size,
            latents=latents,
            metadata=metadata,
        )


def run_chain_set(
    run_one: Callable[[int, RngStream], ChainRecord],
    n_chains: int,
    seed: int,
    model: str,
    workers: int = 1,
) -> DrawMatrix:
    """Run `n_chains` chains, chain c on stream (seed, c), and merge the results.

    The output does not depend on `workers`: each chain owns its stream.
    """

    def _run(chain: int) -> ChainRecord:
        logger.info("Starting %s chain %d (seed %d)", model, chain, seed)
        try:
            record = run_one(chain, RngStream(seed, chain))
        except NumericalError as e:
            raise e.at(chain=chain) from e
        logger.info("Finished %s chain %d: %d draws", model, chain, record.beta.shape[0])
        return record

    if workers > 1 and n_chains > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run, range(n_chains)))
    else:
        records = [_run(c) for c in range(n_chains)]
    return DrawMatrix.from_records(records, seed=seed, model=model)


def gibbs_chain(
    chain: int,
    rng: RngStream,
    init_beta: np.ndarray,
    sweep_fn: Callable[[np.ndarray, RngStream], tuple],
    burn_in: int,
    keep: int,
    thin: int,
    store_latents: bool = False,
) -> ChainRecord:
    """Drive one Gibbs chain.

    `sweep_fn(beta, rng)` returns (new_beta, latents_dict).
    """
    total = burn_in + keep * thin
    p = init_beta.shape[0]
    out = np.empty((keep, p))
    sweeps = np.empty(keep, dtype=np.int64)
    stored_latents: Optional[List[Dict[str, np.ndarray]]] = [] if store_latents else None
    beta = init_beta
    row = 0
    for t in range(1, total + 1):
        try:
            beta, latents = sweep_fn(beta, rng)
        except NumericalError as e:
            raise e.at(sweep=t, chain=chain) from e
        if t > burn_in and (t - burn_in) % thin == 0:
            out[row] = beta
            sweeps[row] = t
            if stored_latents is not None:
                stored_latents.append({k: np.copy(v) for k, v in latents.items()})
            row += 1
    return ChainRecord(chain=chain, beta=out, sweep=sweeps, latents=stored_latents)
