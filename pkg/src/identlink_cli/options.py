"""
Options and small argument helpers shared by the command modules.
"""

from pathlib import Path
from typing import Optional

import numpy as np
import typer

from identlink.errors import DomainError, ParseError

from .settings import RunConfig

ConfigOption = typer.Option(None, "--config", help="key = value configuration file")
SeedOption = typer.Option(None, "--seed", help="Root seed (overrides the config file)")
OutDirOption = typer.Option(None, "--out-dir", help="Output directory (default: IDENTLINK_OUT_DIR or ./identlink-out)")
ModelOption = typer.Option(None, "--model", help="poisson-lambda, poisson-exp or multinomial-lambda")
DataOption = typer.Option(None, "--data", help="Input CSV (overrides data_path)")


def parse_vector(text: Optional[str], name: str) -> Optional[np.ndarray]:
    """'1, -0.5, 2' -> array([1., -0.5, 2.])"""
    if text is None:
        return None
    try:
        return np.array([float(part) for part in text.split(",") if part.strip()])
    except ValueError as e:
        raise ParseError(f"--{name} must be a comma-separated list of numbers", column=name) from e


def require_data(cfg: RunConfig) -> Path:
    if cfg.data_path is None:
        raise DomainError("no dataset given; set data_path in the config or pass --data")
    return cfg.data_path
