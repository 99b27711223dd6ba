"""Truncated spectral representations of functions, priors and forward operators.

Everything here is immutable: arrays handed to the constructors are copied and
frozen, so the objects can be shared freely between worker threads.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Any, Callable, Optional

import numpy as np

from ..config import settings
from ..errors import ContractError, DomainError, ParameterError

logger = logging.getLogger(__name__)

# (indices 1..J, points) -> matrix of shape (len(points), len(indices))
BasisFunctions = Callable[[np.ndarray, np.ndarray], np.ndarray]
# (function on T, points in X) -> values of A applied to the function
FormulaMap = Callable[[Callable[[np.ndarray], np.ndarray], np.ndarray], np.ndarray]


def _frozen(values: Any, ndim: Optional[int] = None) -> np.ndarray:
    array = np.array(values, dtype=float)
    if ndim is not None and array.ndim != ndim:
        raise ContractError(f"Expected a {ndim}-d array, got shape {array.shape}")
    array.setflags(write=False)
    return array


class BasisTag(str, Enum):
    """Which side of the operator a basis lives on."""

    E = "e"  # parameter space T
    G = "g"  # observation space X


@dataclass(frozen=True)
class Domain:
    """Box domain in (possibly polar) coordinates.

    Periodic coordinates accept any finite value; the others must lie in
    their bounds up to ``settings.numerics.domain_tolerance``.
    """

    name: str
    bounds: tuple[tuple[float, float], ...]
    periodic: tuple[bool, ...]

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def is_single_point(self, t: Any) -> bool:
        """True when ``t`` denotes one point rather than a batch."""
        shape = np.shape(t)
        return len(shape) == 0 if self.dim == 1 else shape == (self.dim,)

    def as_points(self, t: Any) -> np.ndarray:
        """Coerce to shape (k,) for 1-d domains or (k, dim) otherwise."""
        points = np.asarray(t, dtype=float)
        if self.dim == 1:
            if points.ndim == 2 and points.shape[1] == 1:
                points = points[:, 0]
            return np.atleast_1d(points)
        points = np.atleast_2d(points)
        if points.shape[1] != self.dim:
            raise ContractError(f"{self.name} expects points with {self.dim} coordinates")
        return points

    def check(self, t: Any, tolerance: Optional[float] = None) -> np.ndarray:
        """Return ``t`` as points, raising :class:`DomainError` outside the domain."""
        tol = settings.numerics.domain_tolerance if tolerance is None else tolerance
        points = self.as_points(t)
        columns = points[:, None] if self.dim == 1 else points
        if not np.all(np.isfinite(columns)):
            raise DomainError(f"Non-finite point passed to {self.name}")
        for axis, ((lo, hi), periodic) in enumerate(zip(self.bounds, self.periodic)):
            if periodic:
                continue
            coord = columns[:, axis]
            if np.any(coord < lo - tol) or np.any(coord > hi + tol):
                bad = coord[(coord < lo - tol) | (coord > hi + tol)][0]
                raise DomainError(f"Point coordinate {bad!r} outside [{lo}, {hi}] of {self.name}")
        return points

    def grid(self, size: int) -> np.ndarray:
        """Regular evaluation grid with roughly ``size`` points."""
        if size < 1:
            raise ParameterError("Grid size must be positive")
        if self.dim == 1:
            (lo, hi), = self.bounds
            return np.linspace(lo, hi, size)
        n_radial = max(2, math.ceil(math.sqrt(size)))
        n_angular = max(1, math.ceil(size / n_radial))
        (r_lo, r_hi), (a_lo, a_hi) = self.bounds
        radial = np.linspace(r_lo, r_hi, n_radial)
        angular = np.linspace(a_lo, a_hi, n_angular, endpoint=False)
        rr, aa = np.meshgrid(radial, angular, indexing="ij")
        return np.column_stack([rr.ravel(), aa.ravel()])


UNIT_INTERVAL = Domain("interval [0,1]", ((0.0, 1.0),), (False,))


@dataclass(frozen=True)
class SpectralBasis:
    """Orthonormal basis b_1, b_2, ... evaluated by closed-form formulas."""

    tag: BasisTag
    domain: Domain
    functions: BasisFunctions

    def __call__(self, j: int, t: Any) -> np.ndarray:
        """Values of the single basis function b_j at ``t``."""
        if j < 1:
            raise ParameterError("Basis indices start at 1")
        points = self.domain.check(t)
        return self.functions(np.array([j]), points)[:, 0]

    def matrix(self, t: Any, truncation: int, start: int = 1) -> np.ndarray:
        """Matrix with entries b_j(t_i) for j = start .. truncation."""
        points = self.domain.check(t)
        indices = np.arange(start, truncation + 1)
        if indices.size == 0:
            return np.zeros((len(points), 0))
        return self.functions(indices, points)

    def combine(self, coeffs: np.ndarray, t: Any, chunk_size: Optional[int] = None) -> np.ndarray:
        """Evaluate sum_j coeffs[j-1] b_j(t), streaming over blocks of basis functions."""
        points = self.domain.check(t)
        chunk = chunk_size or settings.truncation.chunk_size
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim == 1:
            values = np.zeros(len(points))
        else:
            values = np.zeros((len(points),) + coeffs.shape[1:])
        for begin in range(0, len(coeffs), chunk):
            block = coeffs[begin:begin + chunk]
            if not np.any(block):
                continue
            indices = np.arange(begin + 1, begin + len(block) + 1)
            values += self.functions(indices, points) @ block
        return values

    def squared_combine(
        self, weights: np.ndarray, t: Any, chunk_size: Optional[int] = None
    ) -> np.ndarray:
        """Evaluate sum_j weights[j-1] b_j(t)^2 (diagonal of a spectral kernel)."""
        points = self.domain.check(t)
        chunk = chunk_size or settings.truncation.chunk_size
        values = np.zeros(len(points))
        for begin in range(0, len(weights), chunk):
            block = weights[begin:begin + chunk]
            indices = np.arange(begin + 1, begin + len(block) + 1)
            values += (self.functions(indices, points) ** 2) @ block
        return values


@dataclass(frozen=True)
class Measure:
    """Probability measure on a domain: a sampler plus a quadrature rule.

    ``rule(order)`` returns nodes and weights integrating products of the
    first ``order`` basis functions accurately.
    """

    domain: Domain
    sampler: Callable[[int, np.random.Generator], np.ndarray]
    rule: Callable[[int], tuple[np.ndarray, np.ndarray]]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw n i.i.d. points; shape (n,) or (n, dim)."""
        return self.sampler(n, rng)

    def quadrature(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights (summing to 1) accurate for the first ``order`` basis products."""
        return self.rule(order)


class IllposednessKind(str, Enum):
    MILD = "mild"
    SEVERE = "severe"


@dataclass(frozen=True)
class Illposedness:
    """Degree of ill-posedness: kappa_j ~ j^-p (mild) or e^(-c j^p) (severe)."""

    kind: IllposednessKind
    p: float
    c: float = 0.0

    @classmethod
    def mild(cls, p: float) -> "Illposedness":
        if p <= 0:
            raise ParameterError("Mild ill-posedness needs p > 0")
        return cls(IllposednessKind.MILD, float(p))

    @classmethod
    def severe(cls, c: float, p: float) -> "Illposedness":
        if c <= 0 or p <= 0:
            raise ParameterError("Severe ill-posedness needs c > 0 and p > 0")
        return cls(IllposednessKind.SEVERE, float(p), float(c))

    def normalized(self, j: np.ndarray, kappa: np.ndarray) -> np.ndarray:
        """kappa_j * j^p or kappa_j * e^(c j^p); bounded above and below for a correct degree."""
        j = np.asarray(j, dtype=float)
        if self.kind is IllposednessKind.MILD:
            return kappa * j**self.p
        return kappa * np.exp(self.c * j**self.p)


@dataclass(frozen=True)
class ForwardSVD:
    """A forward operator A given by its singular system A e_j = kappa_j g_j."""

    name: str
    kappa: Callable[[np.ndarray], np.ndarray]
    e_basis: SpectralBasis
    g_basis: SpectralBasis
    illposedness: Illposedness
    parameter_measure: Measure
    design_measure: Measure
    # growth exponent gamma of sup_j ||e_j||_inf / j^gamma; metadata only
    sup_growth: float = 0.0
    # A applied through its defining formula: (f on T, points in X) -> values
    apply_formula: Optional[FormulaMap] = None
    parameters: dict[str, float] = field(default_factory=dict, compare=False)

    def kappas(self, truncation: int) -> np.ndarray:
        """Singular values kappa_1 .. kappa_J."""
        return self.kappa(np.arange(1, truncation + 1))

    def basis(self, tag: BasisTag) -> SpectralBasis:
        """The e-basis on the parameter space or the g-basis on the design space."""
        return self.e_basis if BasisTag(tag) is BasisTag.E else self.g_basis


@dataclass(frozen=True)
class SeriesFunction:
    """Function given by its first J coefficients in an orthonormal basis."""

    coeffs: np.ndarray
    basis_tag: BasisTag = BasisTag.E

    def __post_init__(self) -> None:
        coeffs = _frozen(self.coeffs, ndim=1)
        if coeffs.size == 0:
            raise ParameterError("A series needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "basis_tag", BasisTag(self.basis_tag))

    @property
    def truncation(self) -> int:
        return len(self.coeffs)

    def l2_norm(self) -> float:
        """L2 norm, equal to the Euclidean norm of the coefficients by Parseval."""
        return float(np.linalg.norm(self.coeffs))

    def _check_compatible(self, other: "SeriesFunction") -> None:
        if self.basis_tag is not other.basis_tag or self.truncation != other.truncation:
            raise ContractError(
                f"Cannot combine series on basis {self.basis_tag.value}/J={self.truncation} "
                f"with basis {other.basis_tag.value}/J={other.truncation}"
            )

    def __add__(self, other: "SeriesFunction") -> "SeriesFunction":
        self._check_compatible(other)
        return SeriesFunction(self.coeffs + other.coeffs, self.basis_tag)

    def __sub__(self, other: "SeriesFunction") -> "SeriesFunction":
        self._check_compatible(other)
        return SeriesFunction(self.coeffs - other.coeffs, self.basis_tag)

    def __mul__(self, scalar: float) -> "SeriesFunction":
        return SeriesFunction(float(scalar) * self.coeffs, self.basis_tag)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, truncation: int, basis_tag: BasisTag = BasisTag.E) -> "SeriesFunction":
        return cls(np.zeros(truncation), basis_tag)


class PriorFamily(str, Enum):
    POLYNOMIAL = "polynomial"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class PriorSpectrum:
    """Eigenvalues of the prior covariance in the e-basis.

    Polynomial(alpha): lambda_j = j^(-1-2 alpha).
    Exponential(alpha, xi, p): lambda_j = j^(-alpha) exp(-xi j^p).
    """

    family: PriorFamily
    truncation: int
    alpha: float
    xi: Optional[float] = None
    p: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", PriorFamily(self.family))
        if self.truncation < 1:
            raise ParameterError("Prior truncation must be at least 1")
        if self.family is PriorFamily.POLYNOMIAL:
            if self.alpha <= 0:
                raise ParameterError("Polynomial prior needs alpha > 0")
        else:
            if self.alpha < 0 or self.xi is None or self.xi <= 0 or self.p is None or self.p < 1:
                raise ParameterError("Exponential prior needs alpha >= 0, xi > 0 and p >= 1")

    @classmethod
    def polynomial(cls, alpha: float, truncation: int) -> "PriorSpectrum":
        """lambda_j = j^(-1-2 alpha), a prior of Sobolev smoothness alpha."""
        return cls(PriorFamily.POLYNOMIAL, int(truncation), float(alpha))

    @classmethod
    def exponential(cls, alpha: float, xi: float, p: float, truncation: int) -> "PriorSpectrum":
        """lambda_j = j^(-alpha) exp(-xi j^p), analytic sample paths."""
        return cls(PriorFamily.EXPONENTIAL, int(truncation), float(alpha), float(xi), float(p))

    def with_truncation(self, truncation: int) -> "PriorSpectrum":
        return replace(self, truncation=int(truncation))

    def values(self, j: np.ndarray) -> np.ndarray:
        """Eigenvalues at arbitrary (1-based) indices, ignoring the truncation."""
        j = np.asarray(j, dtype=float)
        if self.family is PriorFamily.POLYNOMIAL:
            return j ** (-1.0 - 2.0 * self.alpha)
        return j ** (-self.alpha) * np.exp(-self.xi * j**self.p)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """lambda_1 .. lambda_J (read-only)."""
        return _frozen(self.values(np.arange(1, self.truncation + 1)))

    def tail_mass(self) -> float:
        """Upper bound of sum_{j>J} lambda_j."""
        J = self.truncation
        if self.family is PriorFamily.POLYNOMIAL:
            return float(J ** (-2.0 * self.alpha) / (2.0 * self.alpha))
        # j^-alpha e^(-xi j^p) <= e^(-xi j) for j >= 1
        return float(math.exp(-self.xi * (J + 1)) / (1.0 - math.exp(-self.xi)))

    def describe(self) -> str:
        if self.family is PriorFamily.POLYNOMIAL:
            return f"polynomial(alpha={self.alpha:g}, J={self.truncation})"
        return (
            f"exponential(alpha={self.alpha:g}, xi={self.xi:g}, p={self.p:g}, "
            f"J={self.truncation})"
        )


@dataclass(frozen=True)
class SobolevTruth:
    """True parameter f_0 with its smoothness beta and cached Sobolev norm."""

    beta: float
    series: SeriesFunction
    sobolev_norm: float
    # bound of the neglected mass sum_{j>J} f_{0,j}^2 (0 when unknown)
    tail_bound: float = 0.0

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise ParameterError("Smoothness beta must be positive")

    @classmethod
    def from_series(
        cls, series: SeriesFunction, beta: float, tail_bound: float = 0.0
    ) -> "SobolevTruth":
        return cls(float(beta), series, sobolev_norm(series, beta), float(tail_bound))

    @property
    def truncation(self) -> int:
        return self.series.truncation

    def restricted(self, truncation: int) -> "SobolevTruth":
        """Same truth expressed with exactly ``truncation`` coefficients."""
        coeffs = np.zeros(truncation)
        keep = min(truncation, self.truncation)
        coeffs[:keep] = self.series.coeffs[:keep]
        dropped = float(np.sum(self.series.coeffs[keep:] ** 2))
        return SobolevTruth.from_series(
            SeriesFunction(coeffs, self.series.basis_tag), self.beta, self.tail_bound + dropped
        )


def eval_series(f: SeriesFunction, basis: SpectralBasis, t: Any) -> Any:
    """Evaluate sum_{j<=J} f_j b_j(t) for the basis matching ``f.basis_tag``."""
    if f.basis_tag is not basis.tag:
        raise ContractError(
            f"Series lives on the {f.basis_tag.value}-basis, got the {basis.tag.value}-basis"
        )
    values = basis.combine(f.coeffs, t)
    if basis.domain.is_single_point(t):
        return float(values[0])
    return values


def forward_map(f: SeriesFunction, op: ForwardSVD) -> SeriesFunction:
    """Truncated action of A: coefficients (kappa_j f_j) on the g-basis."""
    if f.basis_tag is not BasisTag.E:
        raise ContractError("forward_map expects a series on the e-basis of the operator")
    return SeriesFunction(op.kappas(f.truncation) * f.coeffs, BasisTag.G)


def sobolev_norm(f: SeriesFunction, beta: float) -> float:
    """sqrt(sum_j j^(2 beta) f_j^2)."""
    if beta < 0:
        raise ParameterError("Sobolev index must be non-negative")
    j = np.arange(1, f.truncation + 1, dtype=float)
    return float(np.sqrt(np.sum(j ** (2.0 * beta) * f.coeffs**2)))


def choose_truncation(
    op: ForwardSVD,
    prior: PriorSpectrum,
    tolerance: Optional[float] = None,
    min_terms: Optional[int] = None,
    max_terms: Optional[int] = None,
) -> int:
    """Smallest J whose neglected forward-prior mass sum_{j>J} lambda_j kappa_j^2
    is below ``tolerance`` times the retained mass, clipped to [min_terms, max_terms].
    """
    tol = settings.truncation.tail_tolerance if tolerance is None else tolerance
    lo = settings.truncation.min_terms if min_terms is None else min_terms
    hi = settings.truncation.max_terms if max_terms is None else max_terms
    if lo < 1 or hi < lo:
        raise ParameterError("Need 1 <= min_terms <= max_terms")

    weights = prior.with_truncation(hi).eigenvalues * op.kappas(hi) ** 2
    retained = np.cumsum(weights)
    tail = retained[-1] - retained
    # the last entry always qualifies, so argmax finds the first J that does
    first = int(np.argmax(tail <= tol * retained)) + 1
    if first >= hi:
        logger.debug("Truncation for %s capped at J=%d", op.name, hi)
    J = int(np.clip(first, lo, hi))
    logger.debug("Truncation for %s with %s: J=%d", op.name, prior.family.value, J)
    return J
