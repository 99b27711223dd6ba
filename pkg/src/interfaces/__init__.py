"""Command-line interface of the toolkit."""

from .cli import ExperimentCLI, load_config, run_cli

__all__ = ["ExperimentCLI", "load_config", "run_cli"]
