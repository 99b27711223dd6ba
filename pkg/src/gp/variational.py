"""Spectral inducing variables and the optimal Gaussian variational posterior.

Both inducing schemes have a diagonal K_uu = diag(d). Every quantity is
computed with the whitened cross-covariance A = D^-1/2 K_uf and the inner
matrix S = I + sigma^-2 A A^T, which stays well conditioned when entries of d
are tiny (heat operator, empirical scheme with m close to n). Directions with
d_j = 0 carry no information and drop out.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, NamedTuple, Optional

import numpy as np
from scipy import linalg

from ..config import settings
from ..errors import ContractError, NumericalError, ParameterError
from ..spectral.model import ForwardSVD, PriorSpectrum, SeriesFunction, SpectralBasis
from .exact import (
    Dataset,
    GaussianPosterior,
    GramSet,
    PosteriorKind,
    robust_cholesky,
)
from .kernels import ForwardPriorKernel

logger = logging.getLogger(__name__)


class SchemeKind(str, Enum):
    POPULATION = "population"
    EMPIRICAL = "empirical"


def _inv_sqrt(values: np.ndarray) -> np.ndarray:
    out = np.zeros_like(values, dtype=float)
    np.divide(1.0, np.sqrt(values), out=out, where=values > 0)
    return out


def _readonly(values: Any) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class InducingScheme:
    """Inducing variables u with K_uu = diag(k_uu_diag).

    ``cross_coeffs`` (J x m) holds the e-coefficients of Cov(f(.), u_j), so that
    K_tu(t) = E(t) @ cross_coeffs. ``kff_diag`` is the diagonal of K_ff, enough
    for every trace term without the full Gram matrix.
    """

    kind: SchemeKind
    m: int
    k_uu_diag: np.ndarray
    k_uf: np.ndarray
    cross_coeffs: np.ndarray
    kff_diag: np.ndarray
    e_basis: SpectralBasis = field(repr=False)
    # all (clamped, descending) eigenvalues of K_ff; empirical scheme only
    spectrum: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        for name in ("k_uu_diag", "k_uf", "cross_coeffs", "kff_diag"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        if self.spectrum is not None:
            object.__setattr__(self, "spectrum", _readonly(self.spectrum))
        if self.k_uf.shape != (self.m, len(self.kff_diag)) or self.cross_coeffs.shape[1] != self.m:
            raise ContractError("Inducing scheme matrices have inconsistent shapes")

    @property
    def n(self) -> int:
        return self.k_uf.shape[1]

    @property
    def K_uu(self) -> np.ndarray:
        return np.diag(self.k_uu_diag)

    def k_tu(self, t: Any) -> np.ndarray:
        """Matrix with rows Cov(f(t_a), u)."""
        return self.e_basis.combine(self.cross_coeffs, t)

    def whitened_k_uf(self) -> np.ndarray:
        """D^-1/2 K_uf."""
        return _inv_sqrt(self.k_uu_diag)[:, None] * self.k_uf

    def whitened_cross(self) -> np.ndarray:
        """cross_coeffs D^-1/2."""
        return self.cross_coeffs * _inv_sqrt(self.k_uu_diag)

    def q_ff(self) -> np.ndarray:
        """Nystrom approximation Q_ff = K_fu K_uu^-1 K_uf (n x n)."""
        white = self.whitened_k_uf()
        q = white.T @ white
        return 0.5 * (q + q.T)


@dataclass(frozen=True)
class VariationalParams:
    """Optimal mean and covariance of q(u)."""

    mu_u: np.ndarray
    Sigma_u: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu_u", _readonly(self.mu_u))
        object.__setattr__(self, "Sigma_u", _readonly(self.Sigma_u))


class GapSummary(NamedTuple):
    trace: float
    spectral_norm: float


def population_scheme(
    op: ForwardSVD, prior: PriorSpectrum, data: Dataset, m: int
) -> InducingScheme:
    """u_j = int Af g_j dG, so K_uu = diag(lambda_j kappa_j^2) and
    K_uf[j, i] = lambda_j kappa_j^2 g_j(x_i).

    Costs O(n m) memory; the Gram matrix is never formed.
    """
    J = prior.truncation
    if not 1 <= m <= J:
        raise ParameterError(f"Population scheme needs 1 <= m <= J={J}, got m={m}")
    kernel = ForwardPriorKernel(op, prior)
    phi = op.g_basis.matrix(data.x, m)
    d = kernel.forward_weights[:m]
    cross = np.zeros((J, m))
    cross[np.arange(m), np.arange(m)] = kernel.cross_weights[:m]
    return InducingScheme(
        kind=SchemeKind.POPULATION,
        m=m,
        k_uu_diag=d,
        k_uf=d[:, None] * phi.T,
        cross_coeffs=cross,
        kff_diag=kernel.forward_var(data.x),
        e_basis=op.e_basis,
    )


def sorted_spectrum(gram: GramSet, clamp: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of K_ff in descending order (stable in the index) with their eigenvectors.

    Negative eigenvalues are set to zero; values below -clamp * trace are logged.
    """
    tol = settings.numerics.eigen_clamp if clamp is None else clamp
    try:
        values, vectors = linalg.eigh(gram.K_ff)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"Eigendecomposition of K_ff failed: {exc}", {"n": gram.n}) from exc
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    trace = float(np.trace(gram.K_ff))
    if values.size and values[-1] < -tol * max(trace, 0.0):
        logger.warning("Clamping eigenvalue %.3g of K_ff (trace %.3g) to zero", values[-1], trace)
    return np.clip(values, 0.0, None), vectors


def empirical_scheme(gram: GramSet, cross_kernel: ForwardPriorKernel, m: int) -> InducingScheme:
    """u_j = sum_i v_j^i Af(x_i) for the top-m eigenvectors v_j of K_ff."""
    if not 1 <= m <= gram.n:
        raise ParameterError(f"Empirical scheme needs 1 <= m <= n={gram.n}, got m={m}")
    values, vectors = sorted_spectrum(gram)
    rho = values[:m]
    V = vectors[:, :m]
    cross = cross_kernel.cross_coefficients(gram.x, features=gram.features) @ V
    return InducingScheme(
        kind=SchemeKind.EMPIRICAL,
        m=m,
        k_uu_diag=rho,
        k_uf=rho[:, None] * V.T,
        cross_coeffs=cross,
        kff_diag=np.diag(gram.K_ff),
        e_basis=cross_kernel.op.e_basis,
        spectrum=values,
    )


class _Inner(NamedTuple):
    white: np.ndarray  # A = D^-1/2 K_uf
    chol: np.ndarray  # lower factor of S = I + A A^T / sigma2
    projected: np.ndarray  # A y


def _inner(scheme: InducingScheme, data: Dataset) -> _Inner:
    data.require_noise()
    if scheme.n != data.n:
        raise ContractError(f"Scheme built for n={scheme.n}, data has n={data.n}")
    white = scheme.whitened_k_uf()
    inner = np.eye(scheme.m) + (white @ white.T) / data.sigma2
    chol, _ = robust_cholesky(0.5 * (inner + inner.T))
    return _Inner(white, chol, white @ data.y)


def fit_variational(scheme: InducingScheme, data: Dataset) -> VariationalParams:
    """mu = sigma^-2 K_uu (K_uu + sigma^-2 K_uf K_fu)^-1 K_uf y and
    Sigma = K_uu (K_uu + sigma^-2 K_uf K_fu)^-1 K_uu, in whitened form.
    """
    _, chol, projected = _inner(scheme, data)
    root = np.sqrt(scheme.k_uu_diag)
    b = linalg.cho_solve((chol, True), projected) / data.sigma2
    inner_inv = linalg.cho_solve((chol, True), np.eye(scheme.m))
    sigma = root[:, None] * inner_inv * root[None, :]
    return VariationalParams(mu_u=root * b, Sigma_u=0.5 * (sigma + sigma.T))


def variational_posterior(
    scheme: InducingScheme,
    params: VariationalParams,
    prior: PriorSpectrum,
    op: ForwardSVD,
) -> GaussianPosterior:
    """mean = K_tu K_uu^-1 mu; cov = k - K_tu K_uu^-1 (K_uu - Sigma) K_uu^-1 K_ut."""
    if scheme.cross_coeffs.shape[0] != prior.truncation:
        raise ContractError(
            f"Scheme has J={scheme.cross_coeffs.shape[0]}, prior has J={prior.truncation}"
        )
    inv_root = _inv_sqrt(scheme.k_uu_diag)
    factor = scheme.whitened_cross()
    core = np.eye(scheme.m) - inv_root[:, None] * params.Sigma_u * inv_root[None, :]
    mean = factor @ (inv_root * params.mu_u)
    return GaussianPosterior(
        kind=PosteriorKind.VARIATIONAL,
        mean=SeriesFunction(mean),
        prior_variances=prior.eigenvalues,
        downdate_factor=factor,
        downdate_core=0.5 * (core + core.T),
        e_basis=op.e_basis,
        scheme=scheme.kind.value,
        m=scheme.m,
        prior_tail=prior.tail_mass(),
    )


class _Evidence(NamedTuple):
    log_det: float  # log |sigma2 I + Q_ff|
    quad: float  # y^T (sigma2 I + Q_ff)^-1 y
    trace_gap: float  # Tr(K_ff - Q_ff)


def _nystrom_evidence(scheme: InducingScheme, data: Dataset, gram: Optional[GramSet]) -> _Evidence:
    white, chol, projected = _inner(scheme, data)
    sigma2 = data.sigma2
    log_det = data.n * math.log(sigma2) + 2.0 * float(np.sum(np.log(np.diag(chol))))
    solved = linalg.cho_solve((chol, True), projected)
    quad = (float(data.y @ data.y) - float(projected @ solved) / sigma2) / sigma2
    kff_diag = np.diag(gram.K_ff) if gram is not None else scheme.kff_diag
    trace_gap = float(np.sum(kff_diag)) - float(np.sum(white * white))
    return _Evidence(log_det, quad, trace_gap)


def elbo(scheme: InducingScheme, data: Dataset, gram: Optional[GramSet] = None) -> float:
    """Collapsed evidence lower bound
    log N(y; 0, sigma2 I + Q_ff) - Tr(K_ff - Q_ff) / (2 sigma2).

    Needs only the diagonal of K_ff, so ``gram`` is optional.
    """
    ev = _nystrom_evidence(scheme, data, gram)
    return (
        -0.5 * (data.n * math.log(2.0 * math.pi) + ev.log_det)
        - 0.5 * ev.quad
        - ev.trace_gap / (2.0 * data.sigma2)
    )


def kl_to_posterior(scheme: InducingScheme, data: Dataset, gram: GramSet) -> float:
    """KL divergence from the variational posterior to the exact posterior.

    Equals the log marginal likelihood minus the ELBO.
    """
    ev = _nystrom_evidence(scheme, data, gram)
    quad_exact = float(data.y @ gram.solve(data.y))
    return 0.5 * (
        ev.quad - quad_exact + ev.log_det - gram.log_det() + ev.trace_gap / data.sigma2
    )


def trace_and_norm_gap(scheme: InducingScheme, gram: GramSet) -> GapSummary:
    """Tr(K_ff - Q_ff) and the spectral norm of K_ff - Q_ff."""
    if scheme.n != gram.n:
        raise ContractError(f"Scheme built for n={scheme.n}, Gram matrix has n={gram.n}")
    residual = gram.K_ff - scheme.q_ff()
    residual = 0.5 * (residual + residual.T)
    values = linalg.eigvalsh(residual)
    return GapSummary(float(np.trace(residual)), float(np.max(np.abs(values))))

