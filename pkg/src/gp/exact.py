"""Gram matrices and the exact conjugate posterior of f given y = Af(x) + noise.

Posteriors are kept in coefficient form on the e-basis: the mean as a
:class:`SeriesFunction` and the covariance as diag(lambda) - F core F^T, which
covers the exact posterior (core = I) and every variational posterior.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np
from scipy import linalg

from ..config import settings
from ..errors import ContractError, NumericalError, ParameterError
from ..spectral.model import ForwardSVD, PriorSpectrum, SeriesFunction, SpectralBasis
from .kernels import ForwardPriorKernel

logger = logging.getLogger(__name__)


def _readonly(values: Any) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Dataset:
    """Observations y_i = (A f_0)(x_i) + Z_i with Z_i ~ N(0, sigma2).

    ``sigma2 = 0`` is accepted for noise-free test data; fitting requires
    ``sigma2 > 0``.
    """

    x: np.ndarray
    y: np.ndarray
    sigma2: float = 1.0
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        x = _readonly(self.x)
        y = _readonly(self.y)
        if y.ndim != 1 or len(x) != len(y):
            raise ContractError(f"x and y must have the same length, got {len(x)} and {y.shape}")
        if len(y) < 1:
            raise ParameterError("A dataset needs at least one observation")
        if not np.all(np.isfinite(y)):
            raise ParameterError("Observations must be finite")
        if not self.sigma2 >= 0:
            raise ParameterError(f"Noise variance must be non-negative, got {self.sigma2}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def n(self) -> int:
        return len(self.y)

    def require_noise(self) -> None:
        if self.sigma2 <= 0:
            raise ParameterError("Fitting needs a positive noise variance sigma2")

    def permuted(self, order: np.ndarray) -> "Dataset":
        """Same observations in another order."""
        order = np.asarray(order)
        return Dataset(self.x[order], self.y[order], self.sigma2, self.seed)

    def subset(self, count: int) -> "Dataset":
        """The first ``count`` observations."""
        return Dataset(self.x[:count], self.y[:count], self.sigma2, self.seed)


@dataclass(frozen=True)
class GramSet:
    """Forward Gram matrix K_ff at the design with the cached Cholesky of K_ff + sigma2 I."""

    x: np.ndarray
    sigma2: float
    K_ff: np.ndarray
    chol: np.ndarray  # lower triangular
    features: np.ndarray  # Phi[i, j] = g_j(x_i)
    kernel: ForwardPriorKernel = field(repr=False)
    jitter: float = 0.0

    @property
    def n(self) -> int:
        return self.K_ff.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """(K_ff + sigma2 I)^-1 rhs through the cached factor."""
        return linalg.cho_solve((self.chol, True), rhs)

    def log_det(self) -> float:
        """log |K_ff + sigma2 I|."""
        return float(2.0 * np.sum(np.log(np.diag(self.chol))))


def robust_cholesky(
    matrix: np.ndarray,
    jitter_scale: Optional[float] = None,
    max_doublings: Optional[int] = None,
) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``matrix``, adding diagonal jitter if needed.

    The first jitter is ``jitter_scale`` times the mean diagonal; it is doubled
    up to ``max_doublings`` times.

    Returns:
        The factor and the jitter actually added (0.0 when none was needed).

    Raises:
        NumericalError: if every attempt fails; carries the smallest eigenvalue.
    """
    scale = settings.numerics.jitter_scale if jitter_scale is None else jitter_scale
    doublings = settings.numerics.jitter_max_doublings if max_doublings is None else max_doublings
    try:
        return linalg.cholesky(matrix, lower=True), 0.0
    except linalg.LinAlgError:
        pass

    mean_diag = float(np.mean(np.diag(matrix)))
    jitter = scale * (mean_diag if mean_diag > 0 else 1.0)
    identity = np.eye(matrix.shape[0])
    for _ in range(doublings + 1):
        try:
            factor = linalg.cholesky(matrix + jitter * identity, lower=True)
            logger.warning("Cholesky needed jitter %.3g (mean diagonal %.3g)", jitter, mean_diag)
            return factor, jitter
        except linalg.LinAlgError:
            jitter *= 2.0

    try:
        min_eig = float(linalg.eigvalsh(matrix, subset_by_index=[0, 0])[0])
    except linalg.LinAlgError:
        min_eig = float("nan")
    raise NumericalError(
        "Cholesky factorization failed after maximal jitter",
        {"min_eigenvalue": min_eig, "jitter": jitter / 2.0, "size": matrix.shape[0]},
    )


def build_gram(
    op: ForwardSVD,
    prior: PriorSpectrum,
    data: Dataset,
    kernel: Optional[ForwardPriorKernel] = None,
) -> GramSet:
    """K_ff[i, k] = sum_j lambda_j kappa_j^2 g_j(x_i) g_j(x_k) and the factor of K_ff + sigma2 I."""
    data.require_noise()
    kernel = kernel or ForwardPriorKernel(op, prior)
    features = kernel.features(data.x)
    K_ff = kernel.gram_from_features(features)
    chol, jitter = robust_cholesky(K_ff + data.sigma2 * np.eye(data.n))
    logger.debug("Gram matrix for %s: n=%d, J=%d", op.name, data.n, kernel.truncation)
    return GramSet(
        x=data.x,
        sigma2=data.sigma2,
        K_ff=_readonly(K_ff),
        chol=_readonly(chol),
        features=_readonly(features),
        kernel=kernel,
        jitter=jitter,
    )


class PosteriorKind(str, Enum):
    EXACT = "exact"
    VARIATIONAL = "variational"


@dataclass(frozen=True)
class GaussianPosterior:
    """Gaussian posterior of f in coefficient form.

    The coefficient covariance is diag(prior_variances) - F core F^T with
    ``F = downdate_factor`` (J x r) and ``core = downdate_core`` (r x r,
    identity when None).
    """

    kind: PosteriorKind
    mean: SeriesFunction
    prior_variances: np.ndarray
    downdate_factor: np.ndarray
    e_basis: SpectralBasis = field(repr=False)
    downdate_core: Optional[np.ndarray] = None
    scheme: Optional[str] = None
    m: Optional[int] = None
    prior_tail: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "prior_variances", _readonly(self.prior_variances))
        object.__setattr__(self, "downdate_factor", _readonly(self.downdate_factor))
        if self.downdate_core is not None:
            object.__setattr__(self, "downdate_core", _readonly(self.downdate_core))
        J = self.mean.truncation
        if self.prior_variances.shape != (J,) or self.downdate_factor.shape[0] != J:
            raise ContractError("Posterior mean, prior variances and factor disagree on J")

    @property
    def truncation(self) -> int:
        return self.mean.truncation

    @property
    def label(self) -> str:
        if self.kind is PosteriorKind.EXACT:
            return "exact"
        return f"{self.scheme}(m={self.m})"

    def _core_apply(self, rows: np.ndarray) -> np.ndarray:
        return rows if self.downdate_core is None else rows @ self.downdate_core

    def mean_at(self, t: Any) -> np.ndarray:
        return self.e_basis.combine(self.mean.coeffs, t)

    def cov_eval(self, t: Any, s: Any) -> np.ndarray:
        """Covariance matrix C(t_a, s_b)."""
        J = self.truncation
        left = self.e_basis.matrix(t, J)
        right = self.e_basis.matrix(s, J)
        prior = (left * self.prior_variances) @ right.T
        left_factor = self._core_apply(left @ self.downdate_factor)
        return prior - left_factor @ (right @ self.downdate_factor).T

    def variance_at(self, t: Any) -> np.ndarray:
        """Pointwise variance C(t, t), streamed over the basis."""
        prior = self.e_basis.squared_combine(self.prior_variances, t)
        projected = self.e_basis.combine(self.downdate_factor, t)
        return prior - np.sum(self._core_apply(projected) * projected, axis=1)

    def variance_mass(self) -> float:
        """Integral of C(t, t) d mu(t) = trace of the coefficient covariance."""
        F = self.downdate_factor
        if self.downdate_core is None:
            correction = float(np.sum(F * F))
        else:
            correction = float(np.sum((F @ self.downdate_core) * F))
        return float(np.sum(self.prior_variances)) - correction

    def coefficient_covariance(self) -> np.ndarray:
        F = self.downdate_factor
        cov = np.diag(self.prior_variances) - self._core_apply(F) @ F.T
        return 0.5 * (cov + cov.T)

    def sample_coefficients(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """``size`` draws of the coefficient vector, shape (size, J)."""
        values, vectors = linalg.eigh(self.coefficient_covariance())
        values = np.clip(values, 0.0, None)
        noise = rng.standard_normal((size, self.truncation))
        return self.mean.coeffs + (noise * np.sqrt(values)) @ vectors.T


def exact_posterior(
    op: ForwardSVD,
    prior: PriorSpectrum,
    data: Dataset,
    gram: Optional[GramSet] = None,
) -> GaussianPosterior:
    """Conjugate posterior: mean coefficients a = Lambda K Phi^T (K_ff + sigma2 I)^-1 y.

    The covariance downdate is F = (L^-1 Phi Lambda K)^T with L the Cholesky
    factor of K_ff + sigma2 I, so that F F^T = Lambda K Phi^T (K_ff + sigma2 I)^-1 Phi K Lambda.
    """
    gram = gram or build_gram(op, prior, data)
    if gram.n != data.n:
        raise ContractError(f"Gram matrix built for n={gram.n}, data has n={data.n}")
    kernel = gram.kernel
    weights = gram.features.T @ gram.solve(data.y)
    coeffs = kernel.cross_weights * weights
    factor = linalg.solve_triangular(gram.chol, gram.features * kernel.cross_weights, lower=True)
    return GaussianPosterior(
        kind=PosteriorKind.EXACT,
        mean=SeriesFunction(coeffs),
        prior_variances=kernel.lambdas,
        downdate_factor=factor.T,
        e_basis=op.e_basis,
        scheme="exact",
        m=data.n,
        prior_tail=prior.tail_mass(),
    )


def log_marginal_likelihood(data: Dataset, gram: GramSet) -> float:
    """log N(y; 0, K_ff + sigma2 I)."""
    if gram.n != data.n:
        raise ContractError(f"Gram matrix built for n={gram.n}, data has n={data.n}")
    quad = float(data.y @ gram.solve(data.y))
    return -0.5 * (data.n * math.log(2.0 * math.pi) + gram.log_det()) - 0.5 * quad
