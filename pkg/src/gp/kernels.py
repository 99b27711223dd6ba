"""Prior covariance of f and of its image Af, both diagonal in the singular system."""

from typing import Any, Optional

import numpy as np

from ..errors import ContractError
from ..spectral.model import ForwardSVD, PriorSpectrum


class ForwardPriorKernel:
    """Spectral kernels induced by a prior aligned with the operator's SVD.

    - prior:    k(t, s)     = sum_j lambda_j e_j(t) e_j(s)
    - cross:    k_fA(t, x)  = sum_j lambda_j kappa_j e_j(t) g_j(x)
    - forward:  k_AA(x, x') = sum_j lambda_j kappa_j^2 g_j(x) g_j(x')
    """

    def __init__(self, op: ForwardSVD, prior: PriorSpectrum, eigenvalues: Optional[Any] = None):
        self.op = op
        self.prior = prior
        # explicit eigenvalues (e.g. a degenerate prior) override the family formula
        if eigenvalues is None:
            self.lambdas = prior.eigenvalues
        else:
            self.lambdas = np.asarray(eigenvalues, dtype=float)
            if self.lambdas.shape != (prior.truncation,) or np.any(self.lambdas < 0):
                raise ContractError("Explicit eigenvalues must be J non-negative numbers")
        self.kappas = op.kappas(prior.truncation)
        self.cross_weights = self.lambdas * self.kappas
        self.forward_weights = self.lambdas * self.kappas**2

    @property
    def truncation(self) -> int:
        return self.prior.truncation

    def features(self, x: Any) -> np.ndarray:
        """Matrix Phi with Phi[i, j] = g_j(x_i)."""
        return self.op.g_basis.matrix(x, self.truncation)

    def prior_cov(self, t: Any, s: Optional[Any] = None) -> np.ndarray:
        """Prior covariance matrix k_f(t_a, s_b) on the parameter domain."""
        left = self.op.e_basis.matrix(t, self.truncation)
        right = left if s is None else self.op.e_basis.matrix(s, self.truncation)
        return (left * self.lambdas) @ right.T

    def prior_var(self, t: Any) -> np.ndarray:
        return self.op.e_basis.squared_combine(self.lambdas, t)

    def cross_coefficients(self, x: Any, features: Optional[np.ndarray] = None) -> np.ndarray:
        """J x n matrix whose column i is the e-coefficient vector of k_fA(., x_i)."""
        phi = self.features(x) if features is None else features
        return self.cross_weights[:, None] * phi.T

    def cross_cov(self, t: Any, x: Any) -> np.ndarray:
        """Matrix K_{t,Af} with entries k_fA(t_a, x_i)."""
        return self.op.e_basis.combine(self.cross_coefficients(x), t)

    def forward_cov(self, x: Any, x2: Optional[Any] = None) -> np.ndarray:
        """Covariance k_Af(x_i, x2_k) of the pushed-forward prior."""
        phi = self.features(x)
        if x2 is None:
            return self.gram_from_features(phi)
        return (phi * self.forward_weights) @ self.features(x2).T

    def gram_from_features(self, phi: np.ndarray) -> np.ndarray:
        """Exactly symmetric Phi diag(lambda kappa^2) Phi^T."""
        gram = (phi * self.forward_weights) @ phi.T
        return 0.5 * (gram + gram.T)

    def forward_var(self, x: Any) -> np.ndarray:
        """Diagonal of k_AA at the design points, streamed over the basis."""
        return self.op.g_basis.squared_combine(self.forward_weights, x)
