"""
Run configuration for the identlink command line.

A config file is line-oriented `key = value` text; `#` starts a comment.
Command-line flags override file values, and IDENTLINK_OUT_DIR supplies the
default output directory.
"""

import io
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from dotenv.parser import parse_stream
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from identlink import GaussianPrior, InitKind, MhConfig, ModelKind, SamplerConfig
from identlink.errors import DomainError, ParseError

logger = logging.getLogger(__name__)

DEFAULT_OUT_DIR = "./identlink-out"


def default_out_dir() -> Path:
    return Path(os.getenv("IDENTLINK_OUT_DIR") or DEFAULT_OUT_DIR)


def _number_list(value: Any) -> Any:
    """'1, 2.5, 3' -> [1.0, 2.5, 3.0]; other values pass through."""
    if isinstance(value, str) and "," in value:
        return [float(part) for part in value.split(",") if part.strip()]
    return value


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())

    model: ModelKind = Field(default=ModelKind.POISSON_LAMBDA, description="Model to fit")
    data_path: Optional[Path] = Field(default=None, description="Input CSV")
    prior_mean: Union[float, List[float]] = Field(
        default=0.0, description="Prior mean; a scalar is broadcast to every coefficient"
    )
    prior_precision: Optional[float] = Field(default=None, gt=0, description="Diagonal value of Psi")
    prior_variance: Optional[float] = Field(default=None, gt=0, description="Diagonal value of Psi^-1")
    prior_precision_path: Optional[Path] = Field(default=None, description="CSV file holding the full Psi")
    burn_in: int = Field(default=1000, ge=0)
    keep: int = Field(default=1000, ge=1)
    thin: int = Field(default=1, ge=1)
    n_chains: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    init_beta: Union[InitKind, List[float]] = Field(default=InitKind.PRIOR_DRAW)
    store_latents: bool = False
    workers: int = Field(default=1, ge=1)
    target_accept: float = Field(default=0.30, gt=0, lt=1, description="Exp-link Metropolis target")
    adapt_window: int = Field(default=50, ge=1)
    out_dir: Path = Field(default_factory=default_out_dir)

    @field_validator("prior_mean", "init_beta", mode="before")
    @classmethod
    def _split_lists(cls, value):
        return _number_list(value)

    @model_validator(mode="after")
    def _check_prior_and_files(self):
        given = [
            name
            for name in ("prior_precision", "prior_variance", "prior_precision_path")
            if getattr(self, name) is not None
        ]
        if len(given) > 1:
            raise ValueError(f"give at most one of {', '.join(given)}")
        for name in ("data_path", "prior_precision_path"):
            path = getattr(self, name)
            if path is not None and not path.is_file():
                raise ValueError(f"{name} '{path}' does not exist")
        return self

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(
            burn_in=self.burn_in,
            keep=self.keep,
            thin=self.thin,
            n_chains=self.n_chains,
            seed=self.seed,
            init_beta=self.init_beta,
            store_latents=self.store_latents,
            workers=self.workers,
        )

    def mh_config(self) -> MhConfig:
        return MhConfig.from_sampler(
            self.sampler_config(),
            target_accept=self.target_accept,
            adapt_window=min(self.adapt_window, self.burn_in) if self.burn_in else self.adapt_window,
        )

    def build_prior(self, p: int) -> GaussianPrior:
        """Gaussian prior of dimension p; N(0, 100 I) unless configured otherwise."""
        mean = np.asarray(self.prior_mean, dtype=np.float64)
        if mean.ndim == 0:
            mean = np.full(p, float(mean))
        if mean.shape != (p,):
            raise DomainError(f"prior_mean has {mean.shape[0]} entries, the design has p = {p}")
        if self.prior_precision_path is not None:
            precision = pd.read_csv(self.prior_precision_path, header=None).to_numpy(dtype=np.float64)
        elif self.prior_precision is not None:
            precision = self.prior_precision * np.eye(p)
        elif self.prior_variance is not None:
            precision = np.eye(p) / self.prior_variance
        else:
            precision = np.eye(p) / 100.0
        return GaussianPrior(mean=mean, precision=precision)


def parse_config_text(text: str) -> Dict[str, str]:
    """Parse `key = value` lines with python-dotenv's parser; `#` starts a comment.

    Raises:
        ParseError: a line that is not a `key = value` binding, with its line number
    """
    values: Dict[str, str] = {}
    for binding in parse_stream(io.StringIO(text)):
        original = binding.original.string
        # the binding's text starts with any blank lines consumed before it
        lineno = binding.original.line + original[: len(original) - len(original.lstrip())].count("\n")
        if binding.error or (binding.key is not None and binding.value is None):
            raise ParseError(f"expected 'key = value', got '{original.strip()}'", row=lineno)
        if binding.key is None:
            continue
        if binding.key in values:
            logger.warning("Config key '%s' repeated on line %d; the last value wins", binding.key, lineno)
        values[binding.key] = binding.value
    return values


def load_run_config(path: Optional[Path] = None, **overrides) -> RunConfig:
    """Read the config file (if any), apply non-None overrides and validate.

    Relative file paths in the config file are resolved against its directory.

    Raises:
        OSError: the config file cannot be read
        ParseError: malformed file or values that fail validation
    """
    values: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        values = parse_config_text(path.read_text())
        for key in ("data_path", "prior_precision_path"):
            if key in values and not Path(values[key]).is_absolute():
                values[key] = str(path.parent / values[key])
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        column = ".".join(str(part) for part in first["loc"]) or None
        raise ParseError(f"invalid configuration: {first['msg']}", column=column) from e
