"""Exceptions raised by the toolkit."""

from typing import Any, Optional

import numpy as np


class InverseGPError(Exception):
    """Base class for every error raised on purpose by this package."""


class ParameterError(InverseGPError, ValueError):
    """A parameter is outside its admissible range."""


class DomainError(InverseGPError, ValueError):
    """An evaluation point lies outside the declared domain."""


class ContractError(InverseGPError, TypeError):
    """Two objects that must share a basis or truncation do not."""


class DataError(InverseGPError, ValueError):
    """Measured data cannot be used (e.g. non-positive MISE in a rate fit)."""


class NumericalError(InverseGPError, np.linalg.LinAlgError):
    """A factorization or eigensolve failed even after the configured safeguards."""

    def __init__(self, message: str, diagnostics: Optional[dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        if self.diagnostics:
            details = ", ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}"
                                for k, v in self.diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)
