from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from identlink import GaussianPrior, PoissonData, RngStream

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

# Monte Carlo tolerance, in standard errors
MC_Z = 3.0


def mc_z(comparisons: int = 1, level: float = 0.01) -> float:
    """Bonferroni z for several simultaneous two-sided checks; never below MC_Z."""
    return max(MC_Z, float(stats.norm.ppf(1.0 - level / (2.0 * comparisons))))


@pytest.fixture
def rng():
    return RngStream(20240601)


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def small_poisson() -> PoissonData:
    design = np.array([[1.0, -0.5], [1.0, 0.0], [1.0, 0.7], [1.0, 1.2]])
    return PoissonData(design, np.array([1, 0, 2, 3]))


@pytest.fixture
def unit_prior() -> GaussianPrior:
    return GaussianPrior.isotropic(2)


@pytest.fixture
def drift_data() -> PoissonData:
    from identlink_cli.io import read_poisson_csv

    return read_poisson_csv(DATA_DIR / "drift_design.csv")


@pytest.fixture
def sparrow_data() -> PoissonData:
    from identlink_cli.io import read_poisson_csv

    return read_poisson_csv(DATA_DIR / "sparrow_synthetic.csv")
