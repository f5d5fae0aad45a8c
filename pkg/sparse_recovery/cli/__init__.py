"""Command-line interface."""
from sparse_recovery.cli.commands import main

__all__ = ["main"]
