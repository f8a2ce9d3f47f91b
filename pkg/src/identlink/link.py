"""
The approximate-identity link lambda(xi) = (xi + sqrt(xi^2 + 4)) / 2.

lambda is the inverse of u -> u - 1/u on (0, inf). It behaves like xi for
large positive xi and like 1/|xi| for large negative xi. Every quantity here
is evaluated without subtractive cancellation: with a = |xi| and
s = sqrt(xi^2 + 4), the large root is a/2 + s/2 (halved before adding, so
it stays finite for every finite xi) and the small root is its reciprocal.
The sign of xi decides which one lambda and b = 2/lambda take. lambda is
positive and finite everywhere; b = 2 * (large root) only overflows for
xi below about -9e307.

All functions accept scalars or numpy arrays.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
import numpy.typing as npt

from .errors import DomainError

ArrayLike = Union[float, npt.ArrayLike]


def _as_finite(xi: ArrayLike, name: str = "xi") -> np.ndarray:
    arr = np.asarray(xi, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _unwrap(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def _roots(xi: np.ndarray):
    a = np.abs(xi)
    s = np.hypot(xi, 2.0)
    big = 0.5 * a + 0.5 * s
    small = 1.0 / big
    return s, big, small


@dataclass(frozen=True)
class LinkValue:
    """Mutually consistent link quantities for one linear predictor value.

    Attributes:
        xi: linear predictor x^T beta
        lam: lambda(xi)
        b: -xi + sqrt(xi^2 + 4), equal to 2 / lambda(xi)
        s: sqrt(xi^2 + 4)
    """

    xi: np.ndarray
    lam: np.ndarray
    b: np.ndarray
    s: np.ndarray


def link_value(xi: ArrayLike) -> LinkValue:
    """Compute lambda, b and s together so the samplers see consistent values."""
    arr = _as_finite(xi)
    s, big, small = _roots(arr)
    positive = arr >= 0
    lam = np.where(positive, big, small)
    b = np.where(positive, 2.0 * small, 2.0 * big)
    return LinkValue(xi=arr, lam=lam, b=b, s=s)


def lam(xi: ArrayLike):
    """Evaluate lambda(xi).

    Raises:
        DomainError: if xi is not finite
    """
    arr = _as_finite(xi)
    _, big, small = _roots(arr)
    return _unwrap(np.where(arr >= 0, big, small))


def lambda_inv(u: ArrayLike):
    """Inverse link, u - 1/u, defined for u > 0."""
    arr = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("lambda_inv requires finite u > 0")
    return _unwrap(arr - 1.0 / arr)


def b_coeff(xi: ArrayLike):
    """Gamma rate b(xi) = -xi + sqrt(xi^2 + 4), evaluated as 2 / lambda(xi)."""
    arr = _as_finite(xi)
    _, big, small = _roots(arr)
    return _unwrap(np.where(arr >= 0, 2.0 * small, 2.0 * big))


def s_coeff(xi: ArrayLike):
    """sqrt(xi^2 + 4)."""
    return _unwrap(np.hypot(_as_finite(xi), 2.0))


def link_curve(grid: ArrayLike) -> np.ndarray:
    """Rows of (xi, lambda(xi), exp(xi)) over a grid, for comparing the two links."""
    xi = _as_finite(np.atleast_1d(grid))
    with np.errstate(over="ignore"):
        return np.column_stack([xi, np.atleast_1d(lam(xi)), np.exp(xi)])
