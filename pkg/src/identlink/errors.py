"""
Exception and warning types raised by the identlink samplers.
"""

from typing import Optional


class IdentlinkError(Exception):
    """Base class for all identlink errors."""


class DomainError(IdentlinkError, ValueError):
    """A parameter or input lies outside the domain of an operation."""


class NumericalError(IdentlinkError, ArithmeticError):
    """A factorization or other numerical step failed.

    Carries the failing Cholesky pivot and, when known, the chain and sweep
    at which the failure happened.
    """

    def __init__(
        self,
        message: str,
        pivot: Optional[int] = None,
        sweep: Optional[int] = None,
        chain: Optional[int] = None,
    ):
        self.pivot = pivot
        self.sweep = sweep
        self.chain = chain
        self.base_message = message
        super().__init__(message)

    def at(self, sweep: Optional[int] = None, chain: Optional[int] = None) -> "NumericalError":
        """Return a copy of this error annotated with chain/sweep coordinates."""
        sweep = self.sweep if sweep is None else sweep
        chain = self.chain if chain is None else chain
        where = []
        if chain is not None:
            where.append(f"chain {chain}")
        if sweep is not None:
            where.append(f"sweep {sweep}")
        base = self.base_message
        message = f"{base} ({', '.join(where)})" if where else base
        annotated = NumericalError(message, pivot=self.pivot, sweep=sweep, chain=chain)
        annotated.base_message = base
        return annotated


class ParseError(IdentlinkError, ValueError):
    """A data file could not be parsed; row and column are 1-based file coordinates."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} at {', '.join(location)}"
        super().__init__(message)


class DegenerateChainWarning(UserWarning):
    """A chain has zero variance, so autocorrelation-based statistics are undefined."""


class LowPowerWarning(UserWarning):
    """A diagnostic was run with too few draws to be informative."""


class ClampWarning(UserWarning):
    """A linear predictor was clamped to keep exp() finite."""
