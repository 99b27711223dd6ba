"""Evaluation of posteriors: MISE, credible bands, rate slopes and m-rules."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Iterable, Optional

import numpy as np
from scipy import stats

from ..config import settings
from ..errors import ContractError, DataError, NumericalError, ParameterError
from ..gp.exact import GaussianPosterior
from ..spectral.model import (
    BasisTag,
    ForwardSVD,
    IllposednessKind,
    PriorFamily,
    PriorSpectrum,
    SobolevTruth,
)

logger = logging.getLogger(__name__)

# guards ceil() against values that are integers up to rounding
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class MiseReport:
    """Mean integrated squared error split into bias and variance."""

    mise: float
    sq_bias: float
    variance_mass: float
    truncation_tail: float = 0.0

    def to_dict(self) -> dict:
        return {
            "mise": self.mise,
            "sq_bias": self.sq_bias,
            "variance_mass": self.variance_mass,
            "truncation_tail": self.truncation_tail,
        }


def _check_truth(post: GaussianPosterior, truth: SobolevTruth) -> None:
    if truth.series.basis_tag is not BasisTag.E:
        raise ContractError("The truth must be given on the e-basis")
    if truth.truncation != post.truncation:
        raise ContractError(
            f"Posterior has J={post.truncation}, truth has J={truth.truncation}; "
            "use SobolevTruth.restricted to align them"
        )


def mise(post: GaussianPosterior, truth: SobolevTruth) -> MiseReport:
    """Closed-form MISE: ||mean - f_0||^2 plus the trace of the posterior covariance."""
    _check_truth(post, truth)
    sq_bias = float(np.sum((post.mean.coeffs - truth.series.coeffs) ** 2))
    variance = post.variance_mass()
    scale = float(np.sum(post.prior_variances))
    if variance < -settings.numerics.variance_tolerance * max(scale, 1.0):
        raise NumericalError("Negative posterior variance mass", {"variance_mass": variance})
    variance = max(variance, 0.0)
    return MiseReport(
        mise=sq_bias + variance,
        sq_bias=sq_bias,
        variance_mass=variance,
        truncation_tail=post.prior_tail + truth.tail_bound,
    )


def mise_monte_carlo(
    post: GaussianPosterior,
    truth: SobolevTruth,
    draws: int,
    rng: np.random.Generator,
    batch: int = 10_000,
) -> tuple[float, float]:
    """Sampling estimate of the MISE and its standard error."""
    _check_truth(post, truth)
    if draws < 2:
        raise ParameterError("Need at least two draws for a standard error")
    errors = []
    remaining = draws
    while remaining > 0:
        size = min(batch, remaining)
        samples = post.sample_coefficients(size, rng)
        errors.append(np.sum((samples - truth.series.coeffs) ** 2, axis=1))
        remaining -= size
    values = np.concatenate(errors)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(draws))


@dataclass(frozen=True)
class CredibleBand:
    """Pointwise credible band mean +/- z * sd on an evaluation grid."""

    grid: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float

    @property
    def half_width(self) -> np.ndarray:
        return 0.5 * (self.upper - self.lower)

    @property
    def mean_width(self) -> float:
        return float(np.mean(self.upper - self.lower))

    def coverage(self, truth_values: np.ndarray) -> float:
        """Fraction of grid points where the truth lies inside the band."""
        truth_values = np.asarray(truth_values, dtype=float)
        inside = (self.lower <= truth_values) & (truth_values <= self.upper)
        return float(np.mean(inside))


def credible_band(
    post: GaussianPosterior, grid: Any, level: Optional[float] = None
) -> CredibleBand:
    """Band mean(t) +/- z_{(1+level)/2} sqrt(C(t, t)) with the exact normal quantile."""
    level = settings.harness.band_level if level is None else level
    if not 0.0 < level < 1.0:
        raise ParameterError(f"Credible level must lie in (0, 1), got {level}")
    points = post.e_basis.domain.check(grid)
    mean = post.mean_at(points)
    variance = post.variance_at(points)
    prior_scale = post.e_basis.squared_combine(post.prior_variances, points)
    tolerance = settings.numerics.variance_tolerance * np.maximum(prior_scale, 1.0)
    if np.any(variance < -tolerance):
        worst = float(np.min(variance))
        raise NumericalError("Negative posterior variance on the grid", {"min_variance": worst})
    z = float(stats.norm.ppf(0.5 * (1.0 + level)))
    half = z * np.sqrt(np.clip(variance, 0.0, None))
    return CredibleBand(grid=points, mean=mean, lower=mean - half, upper=mean + half, level=level)


def recommended_m(
    op: ForwardSVD,
    prior: PriorSpectrum,
    n: int,
    severe_factor: Optional[float] = None,
) -> int:
    """Smallest number of inducing variables that keeps the optimal contraction rate.

    - mild operator, polynomial prior: n^(1/(1+2p+2 alpha))
    - severe operator, exponential prior: ((xi + f c)^-1 log n)^(1/p)
    - mild operator, exponential prior: (xi^-1 log n)^(1/p_prior)
    - severe operator, polynomial prior: ((f c)^-1 log n)^(1/p)

    with f = ``severe_factor`` (2 by default), rounded up.
    """
    if n < 2:
        raise ParameterError("recommended_m needs n >= 2")
    factor = settings.harness.severe_constant_factor if severe_factor is None else severe_factor
    ill = op.illposedness
    log_n = math.log(n)
    polynomial = prior.family is PriorFamily.POLYNOMIAL
    if ill.kind is IllposednessKind.MILD:
        if polynomial:
            value = n ** (1.0 / (1.0 + 2.0 * ill.p + 2.0 * prior.alpha))
        else:
            value = (log_n / prior.xi) ** (1.0 / prior.p)
    else:
        rate = factor * ill.c if polynomial else prior.xi + factor * ill.c
        value = (log_n / rate) ** (1.0 / ill.p)
    return max(1, math.ceil(value - _CEIL_SLACK))


def threshold_curve(op: ForwardSVD, prior: PriorSpectrum, truth: SobolevTruth, n: int) -> int:
    """Threshold m drawn over a phase grid.

    Mild operators: n^(1/(1+2p+2 beta)) with beta taken from the truth.
    Severe operators: ``recommended_m``.
    """
    if n < 2:
        return 1
    ill = op.illposedness
    if ill.kind is IllposednessKind.SEVERE:
        return recommended_m(op, prior, n)
    value = n ** (1.0 / (1.0 + 2.0 * ill.p + 2.0 * truth.beta))
    return max(1, math.ceil(value - _CEIL_SLACK))


def theory_exponent(op: ForwardSVD, prior: PriorSpectrum, truth: SobolevTruth) -> float:
    """Predicted exponent of the squared contraction rate.

    Mild: -2 min(alpha, beta) / (1 + 2 alpha + 2 p) against log n.
    Severe: -2 beta / p against log log n.
    """
    ill = op.illposedness
    if ill.kind is IllposednessKind.SEVERE:
        return -2.0 * truth.beta / ill.p
    if prior.family is not PriorFamily.POLYNOMIAL:
        raise ParameterError("Rate theory for mild operators needs a polynomial prior")
    alpha = prior.alpha
    return -2.0 * min(alpha, truth.beta) / (1.0 + 2.0 * alpha + 2.0 * ill.p)


@dataclass(frozen=True)
class RateEstimate:
    slope: float
    theory_exponent: float
    n_grid: tuple[int, ...]
    r2: float
    intercept: float
    regressor: str

    @property
    def relative_error(self) -> float:
        return abs(self.slope - self.theory_exponent) / abs(self.theory_exponent)


def rate_slope(
    mise_by_n: Iterable[tuple[int, float]],
    op: ForwardSVD,
    prior: PriorSpectrum,
    truth: SobolevTruth,
) -> RateEstimate:
    """Least-squares slope of log MISE against log n (log log n when severely ill-posed)."""
    pairs = list(mise_by_n)
    if len(pairs) < 4:
        raise DataError(f"Need at least 4 sample sizes for a rate fit, got {len(pairs)}")
    n_grid = np.array([n for n, _ in pairs], dtype=float)
    values = np.array([v for _, v in pairs], dtype=float)
    if np.any(np.diff(n_grid) <= 0):
        raise DataError("Sample sizes must be strictly increasing")
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise DataError("MISE values must be positive and finite")

    severe = op.illposedness.kind is IllposednessKind.SEVERE
    regressor = np.log(n_grid)
    if severe:
        if np.any(n_grid <= math.e):
            raise DataError("log log n needs n > e")
        regressor = np.log(regressor)
    fit = stats.linregress(regressor, np.log(values))
    estimate = RateEstimate(
        slope=float(fit.slope),
        theory_exponent=theory_exponent(op, prior, truth),
        n_grid=tuple(int(n) for n in n_grid),
        r2=float(fit.rvalue**2),
        intercept=float(fit.intercept),
        regressor="log log n" if severe else "log n",
    )
    logger.debug("Rate slope %.4f (theory %.4f)", estimate.slope, estimate.theory_exponent)
    return estimate
