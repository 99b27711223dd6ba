"""Spectral GP inverse - exact and variational GP posteriors for linear inverse problems."""

__version__ = "0.1.0"
