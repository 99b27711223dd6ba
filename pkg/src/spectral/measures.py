"""Design and parameter measures: samplers, quadrature rules, orthonormality checks.

Intervals use Gauss-Legendre; the disc and the space of lines use a product
rule with the trapezoid rule in the angle, which is exact for the trigonometric
angular factors of the bases.
"""

import math
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..config import settings
from .model import UNIT_INTERVAL, Domain, Measure, SpectralBasis

DISC = Domain("unit disc (r, theta)", ((0.0, 1.0), (0.0, 2.0 * math.pi)), (False, True))
LINES = Domain("lines (s, phi)", ((0.0, 1.0), (0.0, 2.0 * math.pi)), (False, True))


def gauss_legendre(nodes: int, lo: float = 0.0, hi: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [lo, hi]."""
    x, w = leggauss(nodes)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _radial_nodes(order: int) -> int:
    return max(16, settings.quadrature.interval_factor * order)


def _angular_nodes(order: int) -> int:
    return max(16, settings.quadrature.angle_factor * order)


def _interval_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    return gauss_legendre(_radial_nodes(order))


def _disc_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    # mu = pi^-1 * Lebesgue = pi^-1 r dr dtheta
    r, w_r = gauss_legendre(_radial_nodes(order))
    n_theta = _angular_nodes(order)
    theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    weights = np.outer(w_r * r / math.pi, np.full(n_theta, 2.0 * math.pi / n_theta))
    return np.column_stack([rr.ravel(), tt.ravel()]), weights.ravel()


def _lines_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    # dG = (2/pi^2) sqrt(1-s^2) ds dphi; substitute s = cos(psi), psi in [0, pi/2]
    psi, w_psi = gauss_legendre(_radial_nodes(order), 0.0, 0.5 * math.pi)
    s = np.cos(psi)
    n_phi = _angular_nodes(order)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    ss, pp = np.meshgrid(s, phi, indexing="ij")
    radial = w_psi * np.sin(psi) ** 2 * 2.0 / math.pi**2
    weights = np.outer(radial, np.full(n_phi, 2.0 * math.pi / n_phi))
    return np.column_stack([ss.ravel(), pp.ravel()]), weights.ravel()


def _uniform_sampler(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.random(n)


def _disc_sampler(n: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random((n, 2))
    return np.column_stack([np.sqrt(u[:, 0]), 2.0 * math.pi * u[:, 1]])


def _lines_sampler(n: int, rng: np.random.Generator) -> np.ndarray:
    # |x| of a uniform point in the disc has density proportional to sqrt(1 - s^2)
    u = rng.random((n, 3))
    s = np.abs(np.sqrt(u[:, 0]) * np.cos(2.0 * math.pi * u[:, 1]))
    return np.column_stack([s, 2.0 * math.pi * u[:, 2]])


def uniform_interval_measure() -> Measure:
    """Uniform probability measure on [0, 1]."""
    return Measure(UNIT_INTERVAL, _uniform_sampler, _interval_rule)


def disc_measure() -> Measure:
    """pi^-1 times Lebesgue measure on the unit disc, in polar coordinates."""
    return Measure(DISC, _disc_sampler, _disc_rule)


def lines_measure() -> Measure:
    """Probability measure (2/pi^2) sqrt(1-s^2) ds dphi on [0,1] x [0, 2 pi)."""
    return Measure(LINES, _lines_sampler, _lines_rule)


def line_density_s(s: np.ndarray) -> np.ndarray:
    """Marginal density (4/pi) sqrt(1-s^2) of the s-coordinate of the line measure."""
    return 4.0 / math.pi * np.sqrt(np.clip(1.0 - np.asarray(s) ** 2, 0.0, None))


def integrate(measure: Measure, func: Callable[[np.ndarray], np.ndarray], order: int) -> float:
    """Integral of ``func`` against ``measure`` with the rule for ``order`` basis functions."""
    points, weights = measure.quadrature(order)
    return float(np.dot(weights, func(points)))


def basis_gram(basis: SpectralBasis, measure: Measure, truncation: int) -> np.ndarray:
    """Quadrature Gram matrix (integral of b_i b_j) of the first ``truncation`` functions."""
    points, weights = measure.quadrature(truncation)
    values = basis.matrix(points, truncation)
    return values.T @ (weights[:, None] * values)


def orthonormality_defect(
    basis: SpectralBasis, measure: Measure, truncation: int, gram: Optional[np.ndarray] = None
) -> float:
    """Largest entry of |Gram - I|; zero for an orthonormal basis."""
    gram = basis_gram(basis, measure, truncation) if gram is None else gram
    return float(np.max(np.abs(gram - np.eye(truncation))))
