"""Singular systems of the Volterra, heat-equation and Radon forward operators."""

import math
from enum import Enum
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import eval_chebyu, eval_jacobi

from ..errors import ParameterError
from ..seeding import DESIGN_STREAM, make_rng
from .measures import disc_measure, lines_measure, uniform_interval_measure
from .model import BasisTag, ForwardSVD, Illposedness, SpectralBasis

SQRT2 = math.sqrt(2.0)

# Gauss-Legendre nodes used by the defining formulas (integrands are smooth)
FORMULA_NODES = 64

PointFunction = Callable[[np.ndarray], np.ndarray]


class OperatorName(str, Enum):
    VOLTERRA = "volterra"
    HEAT = "heat"
    RADON = "radon"


# ===== Volterra operator: A f(x) = int_0^x f(s) ds =====


def _volterra_kappa(j: np.ndarray) -> np.ndarray:
    return 1.0 / ((np.asarray(j, dtype=float) - 0.5) * math.pi)


def _volterra_e(j: np.ndarray, t: np.ndarray) -> np.ndarray:
    return SQRT2 * np.cos(np.outer(t, (j - 0.5) * math.pi))


def _volterra_g(j: np.ndarray, x: np.ndarray) -> np.ndarray:
    return SQRT2 * np.sin(np.outer(x, (j - 0.5) * math.pi))


def _volterra_formula(f: PointFunction, x: np.ndarray) -> np.ndarray:
    u, w = leggauss(FORMULA_NODES)
    x = np.asarray(x, dtype=float)
    nodes = np.outer(x, 0.5 * (u + 1.0))
    values = f(nodes.ravel()).reshape(nodes.shape)
    return 0.5 * x * (values @ w)


def volterra() -> ForwardSVD:
    """Volterra integration operator on L2[0,1]; mildly ill-posed of degree 1."""
    interval = uniform_interval_measure()
    return ForwardSVD(
        name=OperatorName.VOLTERRA.value,
        kappa=_volterra_kappa,
        e_basis=SpectralBasis(BasisTag.E, interval.domain, _volterra_e),
        g_basis=SpectralBasis(BasisTag.G, interval.domain, _volterra_g),
        illposedness=Illposedness.mild(1.0),
        parameter_measure=interval,
        design_measure=interval,
        sup_growth=0.0,
        apply_formula=_volterra_formula,
    )


# ===== Heat equation: A f = u(., T) with u(., 0) = f and Dirichlet boundary =====


def _sine(j: np.ndarray, x: np.ndarray) -> np.ndarray:
    return SQRT2 * np.sin(np.outer(x, np.asarray(j, dtype=float) * math.pi))


def heat(T: float) -> ForwardSVD:
    """Initial condition to solution at time T; severely ill-posed with c = pi^2 T, p = 2."""
    if not T > 0:
        raise ParameterError(f"Diffusion time must be positive, got T={T}")
    rate = math.pi**2 * T

    def kappa(j: np.ndarray) -> np.ndarray:
        return np.exp(-rate * np.asarray(j, dtype=float) ** 2)

    # modes beyond this are below double precision after time T
    terms = min(2000, math.ceil(math.sqrt(45.0 / rate)) + 1)

    def formula(f: PointFunction, x: np.ndarray) -> np.ndarray:
        s, w = leggauss(max(FORMULA_NODES, 4 * terms))
        s = 0.5 * (s + 1.0)
        w = 0.5 * w
        k = np.arange(1, terms + 1)
        modes = _sine(k, s)
        initial = (w * f(s)) @ modes
        return _sine(k, np.asarray(x, dtype=float)) @ (initial * kappa(k))

    interval = uniform_interval_measure()
    return ForwardSVD(
        name=OperatorName.HEAT.value,
        kappa=kappa,
        e_basis=SpectralBasis(BasisTag.E, interval.domain, _sine),
        g_basis=SpectralBasis(BasisTag.G, interval.domain, _sine),
        illposedness=Illposedness.severe(rate, 2.0),
        parameter_measure=interval,
        design_measure=interval,
        sup_growth=0.0,
        apply_formula=formula,
        parameters={"T": float(T)},
    )


# ===== Radon transform on the unit disc =====


def radon_indices(j: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Single index j -> (m_j, l_j).

    m_j = ceil((sqrt(1+8j)-1)/2) - 1 and l_j = 2(j-1) - m_j(m_j+2).
    """
    j = np.asarray(j, dtype=np.int64)
    disc = 1 + 8 * j
    root = np.floor(np.sqrt(disc.astype(float))).astype(np.int64)
    root -= (root * root > disc)
    root += ((root + 1) * (root + 1) <= disc)
    exact = root * root == disc
    ceil_half = np.where(exact, (root - 1) // 2, (root + 1) // 2)
    m = ceil_half - 1
    l = 2 * (j - 1) - m * (m + 2)
    return m, l


def zernike_radial(m: np.ndarray, k: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Zernike radial polynomial R_m^k(r) via its Jacobi-polynomial form (m - k even, k >= 0)."""
    n = (np.asarray(m) - np.asarray(k)) // 2
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    r = np.asarray(r, dtype=float)
    return sign * r**k * eval_jacobi(n, k, 0, 1.0 - 2.0 * r**2)


def _angular(l: np.ndarray, angle: np.ndarray) -> np.ndarray:
    # real convention: sqrt2 cos(l a) for l > 0, 1 for l = 0, sqrt2 sin(l a) for l < 0
    phase = np.outer(angle, l)
    return np.where(l > 0, SQRT2 * np.cos(phase), np.where(l < 0, SQRT2 * np.sin(phase), 1.0))


def _radon_e(j: np.ndarray, points: np.ndarray) -> np.ndarray:
    m, l = radon_indices(j)
    r = points[:, 0][:, None]
    radial = np.sqrt(m + 1.0) * zernike_radial(m[None, :], np.abs(l)[None, :], r)
    return radial * _angular(l, points[:, 1])


def _radon_g(j: np.ndarray, points: np.ndarray) -> np.ndarray:
    m, l = radon_indices(j)
    s = points[:, 0][:, None]
    return eval_chebyu(m[None, :], s) * _angular(l, points[:, 1])


def _radon_kappa(j: np.ndarray) -> np.ndarray:
    m, _ = radon_indices(j)
    return 1.0 / np.sqrt(m + 1.0)


def _radon_formula(f: PointFunction, points: np.ndarray) -> np.ndarray:
    # chord average (2 sqrt(1-s^2))^-1 int f(s cos phi - t sin phi, s sin phi + t cos phi) dt
    u, w = leggauss(FORMULA_NODES)
    s = points[:, 0][:, None]
    phi = points[:, 1][:, None]
    t = np.sqrt(np.clip(1.0 - s**2, 0.0, None)) * u[None, :]
    x = s * np.cos(phi) - t * np.sin(phi)
    y = s * np.sin(phi) + t * np.cos(phi)
    r = np.clip(np.hypot(x, y), 0.0, 1.0)
    theta = np.mod(np.arctan2(y, x), 2.0 * math.pi)
    values = f(np.column_stack([r.ravel(), theta.ravel()])).reshape(r.shape)
    return 0.5 * values @ w


def radon() -> ForwardSVD:
    """Radon transform of functions on the unit disc; mildly ill-posed of degree 1/4."""
    disc = disc_measure()
    lines = lines_measure()
    return ForwardSVD(
        name=OperatorName.RADON.value,
        kappa=_radon_kappa,
        e_basis=SpectralBasis(BasisTag.E, disc.domain, _radon_e),
        g_basis=SpectralBasis(BasisTag.G, lines.domain, _radon_g),
        illposedness=Illposedness.mild(0.25),
        parameter_measure=disc,
        design_measure=lines,
        sup_growth=0.5,
        apply_formula=_radon_formula,
    )


def build_operator(name: str, T: float = 0.01) -> ForwardSVD:
    """Operator by name; ``T`` is only used by the heat equation."""
    name = OperatorName(name)
    if name is OperatorName.VOLTERRA:
        return volterra()
    if name is OperatorName.HEAT:
        return heat(T)
    return radon()


def sample_design(op: ForwardSVD, n: int, seed: int) -> np.ndarray:
    """n i.i.d. design points from the operator's design measure G."""
    if n < 1:
        raise ParameterError("Need at least one design point")
    return op.design_measure.sample(n, make_rng(seed, DESIGN_STREAM))
