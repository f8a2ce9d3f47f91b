"""
Result dictionaries and exit codes shared by every command.

A command body returns {"success": True, ...} or {"success": False, ...}
(a check that ran but failed); exceptions become {"error": ..., "details": ...}.
"""

import functools
import json
import logging
from enum import IntEnum
from pathlib import Path
from typing import Any, Callable, Dict

import numpy as np
import typer

from identlink.errors import DomainError, IdentlinkError, NumericalError, ParseError

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    OK = 0
    FAILED = 1
    USAGE = 2


def _json_default(value: Any):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def error_result(e: Exception) -> Dict[str, Any]:
    """Turn an exception into the error dictionary printed by the CLI."""
    if isinstance(e, ParseError):
        return {
            "error": f"Failed to parse input: {e}",
            "details": {"row": e.row, "column": e.column},
        }
    if isinstance(e, NumericalError):
        return {
            "error": f"Numerical failure: {e}",
            "details": {"pivot": e.pivot, "sweep": e.sweep, "chain": e.chain},
        }
    if isinstance(e, DomainError):
        return {"error": f"Invalid input: {e}", "details": None}
    return {"error": f"Unexpected error occurred: {str(e)}"}


def emit(result: Dict[str, Any]) -> ExitCode:
    typer.echo(json.dumps(result, indent=2, default=_json_default))
    if "error" in result:
        return result.get("exit_code", ExitCode.FAILED)
    return ExitCode.OK if result.get("success") else ExitCode.FAILED


def reported(func: Callable[..., Dict[str, Any]]) -> Callable[..., None]:
    """Run a command body, print its result as JSON and exit with the matching code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            result = func(*args, **kwargs)
        except OSError as e:
            result = {"error": f"Cannot access file: {e}", "details": getattr(e, "filename", None)}
            result["exit_code"] = ExitCode.USAGE
        except IdentlinkError as e:
            logger.error("%s failed: %s", func.__name__, e)
            result = error_result(e)
        except Exception as e:
            logger.exception("%s failed", func.__name__)
            result = error_result(e)
        code = emit(result)
        if code != ExitCode.OK:
            raise typer.Exit(int(code))

    return wrapper
