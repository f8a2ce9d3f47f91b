from .cli import app, cli_dispatch, main

__version__ = "1.0.0"
__all__ = ["app", "cli_dispatch", "main"]
