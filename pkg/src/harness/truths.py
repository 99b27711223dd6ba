"""True parameters f_0 used in the simulation studies.

Each recipe sets f_{0,j} = c_j j^-(1+beta) on the operator's e-basis, with
c_j oscillating between two ranges for odd and even j.
"""

import math
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import ContractError, ParameterError
from ..spectral.model import ForwardSVD, SeriesFunction, SobolevTruth

Coefficients = Callable[[np.ndarray], np.ndarray]


class TruthRecipe(str, Enum):
    HEAT = "heat"
    VOLTERRA = "volterra"
    RADON = "radon"


def _alternating(odd: Coefficients, even: Coefficients) -> Coefficients:
    def coefficients(j: np.ndarray) -> np.ndarray:
        j = np.asarray(j, dtype=float)
        return np.where(j % 2 == 1, odd(j), even(j))

    return coefficients


_ROOT2, _ROOT3, _ROOT5, _ROOT7 = (math.sqrt(k) * math.pi for k in (2, 3, 5, 7))

# recipe -> (coefficient rule, sup_j |c_j|)
_RECIPES: dict[TruthRecipe, tuple[Coefficients, float]] = {
    TruthRecipe.HEAT: (
        _alternating(
            lambda j: 1.0 + 0.4 * np.sin(_ROOT5 * j),
            lambda j: 2.5 + 2.0 * np.sin(_ROOT2 * j),
        ),
        4.5,
    ),
    TruthRecipe.VOLTERRA: (
        _alternating(
            lambda j: 1.0 + 0.9 * np.sin(_ROOT3 * j),
            lambda j: 1.0 + 0.8 * np.sin(_ROOT7 * j),
        ),
        1.9,
    ),
    TruthRecipe.RADON: (
        _alternating(
            lambda j: 1.0 + 0.5 * np.sin(_ROOT3 * j),
            lambda j: 2.0 + 0.8 * np.sin(_ROOT7 * j),
        ),
        2.8,
    ),
}


def recipe_coefficients(recipe: TruthRecipe, j: np.ndarray) -> np.ndarray:
    """The oscillating factors c_j of a recipe."""
    rule, _ = _RECIPES[TruthRecipe(recipe)]
    return rule(j)


def make_truth(
    recipe: TruthRecipe,
    beta: float,
    truncation: int,
    op: Optional[ForwardSVD] = None,
) -> SobolevTruth:
    """f_{0,j} = c_j j^-(1+beta) for j <= truncation.

    ``op``, when given, must be the operator the recipe was designed for.
    The neglected mass is bounded by sup c_j^2 J^-(1+2 beta) / (1 + 2 beta).
    """
    recipe = TruthRecipe(recipe)
    if op is not None and op.name != recipe.value:
        raise ContractError(
            f"Truth recipe '{recipe.value}' does not belong to operator '{op.name}'"
        )
    if beta <= 0:
        raise ParameterError("Smoothness beta must be positive")
    if truncation < 1:
        raise ParameterError("Truncation must be at least 1")
    rule, c_max = _RECIPES[recipe]
    j = np.arange(1, truncation + 1, dtype=float)
    coeffs = rule(j) * j ** (-(1.0 + beta))
    tail = c_max**2 * truncation ** (-(1.0 + 2.0 * beta)) / (1.0 + 2.0 * beta)
    return SobolevTruth.from_series(SeriesFunction(coeffs), beta, tail)


def custom_truth(coefficients: Sequence[float], beta: float, truncation: int) -> SobolevTruth:
    """User-supplied e-basis coefficients, padded with zeros (or cut) to ``truncation``."""
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.ndim != 1 or coefficients.size == 0:
        raise ParameterError("Custom truth needs a non-empty list of coefficients")
    truth = SobolevTruth.from_series(SeriesFunction(coefficients), beta)
    return truth.restricted(truncation)
