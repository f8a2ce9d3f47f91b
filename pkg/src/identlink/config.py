"""
Sampler configuration schemas.
"""

from enum import Enum
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ModelKind(str, Enum):
    POISSON_LAMBDA = "poisson-lambda"
    POISSON_EXP = "poisson-exp"
    MULTINOMIAL_LAMBDA = "multinomial-lambda"


class InitKind(str, Enum):
    PRIOR_DRAW = "prior-draw"
    ZERO = "zero"


class SamplerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    burn_in: int = Field(default=1000, ge=0, description="Sweeps discarded before storing draws")
    keep: int = Field(default=1000, ge=1, description="Number of stored draws per chain")
    thin: int = Field(default=1, ge=1, description="Store every thin-th post-burn-in sweep")
    n_chains: int = Field(default=1, ge=1, description="Number of independent chains")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Root seed; chain c uses stream id c")
    init_beta: Union[InitKind, List[float]] = Field(
        default=InitKind.PRIOR_DRAW,
        description="Starting coefficients: 'prior-draw', 'zero' or an explicit vector",
    )
    store_latents: bool = Field(default=False, description="Also keep the latent variables of stored sweeps")
    workers: int = Field(default=1, ge=1, description="Threads used to run chains")

    @property
    def total_sweeps(self) -> int:
        return self.burn_in + self.keep * self.thin


class MhConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    initial_step: Optional[float] = Field(
        default=None,
        gt=0,
        description="Initial random-walk scale; defaults to 2.38 / sqrt(p)",
    )
    target_accept: float = Field(default=0.30, gt=0, lt=1, description="Acceptance rate targeted during burn-in")
    adapt_window: int = Field(default=50, ge=1, description="Sweeps per Robbins-Monro adaptation window")
    burn_in: int = Field(default=1000, ge=0)
    keep: int = Field(default=1000, ge=1)
    thin: int = Field(default=1, ge=1)
    n_chains: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    init_beta: Union[InitKind, List[float], None] = Field(
        default=None,
        description="Starting point; None starts at the posterior mode",
    )
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _window_fits(self):
        if self.burn_in and self.adapt_window > self.burn_in:
            raise ValueError("adapt_window must not exceed burn_in")
        return self

    @property
    def total_sweeps(self) -> int:
        return self.burn_in + self.keep * self.thin

    @classmethod
    def from_sampler(cls, config: SamplerConfig, **overrides) -> "MhConfig":
        """Reuse the chain-length fields of a SamplerConfig."""
        fields = {
            "burn_in": config.burn_in,
            "keep": config.keep,
            "thin": config.thin,
            "n_chains": config.n_chains,
            "seed": config.seed,
            "workers": config.workers,
        }
        if not isinstance(config.init_beta, InitKind):
            fields["init_beta"] = config.init_beta
        fields.update({k: v for k, v in overrides.items() if v is not None})
        if fields["burn_in"]:
            fields.setdefault("adapt_window", min(50, fields["burn_in"]))
        return cls(**fields)


class GirSpec(BaseModel):
    """Small problem used by the getting-it-right harness."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(default=3, ge=1, le=5)
    p: int = Field(default=2, ge=1, le=3)
    categories: int = Field(default=2, ge=1, description="p_i for multinomial models")
    trials: int = Field(default=2, ge=1, description="m_i for multinomial models")
    design_seed: int = Field(default=20240601, ge=0)

    @field_validator("categories")
    @classmethod
    def _categories_small(cls, value: int) -> int:
        if value > 5:
            raise ValueError("categories must be at most 5")
        return value
