import logging
import sys
from typing import List, Optional

import click
import typer
from dotenv import load_dotenv

try:  # typer >= 0.26 vendors its own copy of click
    from typer._click.exceptions import Abort as _TyperAbort, UsageError as _TyperUsageError
except ImportError:
    _TyperAbort, _TyperUsageError = click.Abort, click.UsageError

load_dotenv()

# Import sampler commands
from .sampling import register_sampling_commands
# Import diagnostic commands
from .checks import register_check_commands
# Import dataset commands
from .datasets import register_dataset_commands
from .results import ExitCode


# Set up logging
logging.basicConfig(level=logging.INFO)


app = typer.Typer(
    name="identlink",
    help="Samplers and diagnostics for regression under the approximate-identity link.",
    add_completion=False,
    no_args_is_help=True,
)


@app.callback()
def _root(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level")):
    """identlink command line."""
    logging.getLogger().setLevel(logging.DEBUG if verbose else logging.INFO)


register_sampling_commands(app)
register_check_commands(app)
register_dataset_commands(app)


def cli_dispatch(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code: 0 success, 1 failed check or bad input, 2 usage error."""
    try:
        code = app(args=argv, prog_name="identlink", standalone_mode=False)
    except (click.UsageError, _TyperUsageError) as e:
        e.show()
        return int(ExitCode.USAGE)
    except (click.Abort, _TyperAbort):
        return int(ExitCode.FAILED)
    return int(code or 0)


def main():
    logging.info("Starting identlink")
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
