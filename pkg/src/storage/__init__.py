"""Storage module for run records, phase grids and band exports."""

from .results import ResultStorage

__all__ = ["ResultStorage"]
