"""Simulation studies: synthetic data, replicated fits and their summaries.

A run fits the exact posterior (optional, O(n^3)) and one variational
posterior per inducing scheme and m, recording MISE, KL gap, ELBO, band
coverage and timings. Replicates are independent and seeded through
:func:`derive_seed`, so results do not depend on the number of workers.
"""

import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from statistics import median
from typing import Any, Optional

import numpy as np
from dotenv import dotenv_values
from numpy.linalg import LinAlgError
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .. import __version__
from ..config import settings
from ..errors import ContractError, InverseGPError, ParameterError
from ..evaluation.metrics import CredibleBand, credible_band, mise, threshold_curve
from ..gp.exact import (
    Dataset,
    GaussianPosterior,
    GramSet,
    build_gram,
    exact_posterior,
    log_marginal_likelihood,
)
from ..gp.kernels import ForwardPriorKernel
from ..gp.variational import (
    SchemeKind,
    elbo,
    empirical_scheme,
    fit_variational,
    kl_to_posterior,
    population_scheme,
    variational_posterior,
)
from ..seeding import NOISE_STREAM, derive_seed, make_rng
from ..spectral.model import (
    BasisTag,
    ForwardSVD,
    PriorFamily,
    PriorSpectrum,
    SobolevTruth,
    choose_truncation,
    eval_series,
    forward_map,
)
from ..spectral.operators import OperatorName, build_operator, sample_design
from .truths import TruthRecipe, custom_truth, make_truth

logger = logging.getLogger(__name__)


class SchemeChoice(str, Enum):
    POPULATION = "population"
    EMPIRICAL = "empirical"
    BOTH = "both"

    def kinds(self) -> list[SchemeKind]:
        if self is SchemeChoice.BOTH:
            return [SchemeKind.POPULATION, SchemeKind.EMPIRICAL]
        return [SchemeKind(self.value)]


# Setups of the published simulation studies
PRESETS: dict[str, dict[str, Any]] = {
    "heat": {
        "operator": "heat",
        "T": 0.01,
        "prior_family": "exponential",
        "alpha": 0.0,
        "xi": 0.1,
        "prior_p": 2.0,
        "truth": "heat",
        "beta": 1.0,
        "n": 4000,
        "m_list": [3, 6, 12],
        "replicates": 50,
    },
    "volterra": {
        "operator": "volterra",
        "prior_family": "polynomial",
        "truth": "volterra",
        "beta": 0.6,
        "n": 4000,
        "m_list": [4, 8, 16],
        "replicates": 30,
    },
    "radon-500": {
        "operator": "radon",
        "prior_family": "polynomial",
        "truth": "radon",
        "beta": 0.6,
        "n": 500,
        "m_list": [10, 3],
        "replicates": 1,
    },
    "radon-5000": {
        "operator": "radon",
        "prior_family": "polynomial",
        "truth": "radon",
        "beta": 0.6,
        "n": 5000,
        "m_list": [24, 6],
        "replicates": 1,
    },
}


class ExperimentConfig(BaseModel):
    """Everything needed to regenerate a run.

    Files use flat ``key=value`` lines with the field names as keys; lists are
    comma separated. ``alpha`` defaults to ``beta`` for polynomial priors and
    to 0 for exponential ones; ``truth`` defaults to the operator's recipe.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    operator: OperatorName = OperatorName.VOLTERRA
    T: float = Field(default=0.01, gt=0)
    prior_family: PriorFamily = PriorFamily.POLYNOMIAL
    alpha: Optional[float] = Field(default=None, ge=0)
    xi: float = Field(default=0.1, gt=0)
    prior_p: float = Field(default=2.0, ge=1)
    truth: Optional[TruthRecipe] = None
    coefficients: Optional[list[float]] = None
    beta: float = Field(default=0.6, gt=0)
    n: int = Field(default=1000, ge=1)
    m_list: list[int] = Field(default_factory=lambda: [4, 8, 16], min_length=1)
    replicates: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    sigma2: float = Field(default=1.0, gt=0)
    scheme: SchemeChoice = SchemeChoice.POPULATION
    exact: bool = True
    truncation: Optional[int] = Field(default=None, ge=1)
    grid_size: int = Field(default_factory=lambda: settings.harness.grid_size, ge=2)
    band_level: float = Field(default_factory=lambda: settings.harness.band_level, gt=0, lt=1)
    workers: int = Field(default_factory=lambda: settings.harness.workers, ge=1)
    output_dir: Path = Field(default_factory=lambda: settings.harness.output_dir)

    @field_validator("m_list", "coefficients", mode="before")
    @classmethod
    def _split_list(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value

    @field_validator("m_list")
    @classmethod
    def _positive_m(cls, value: list[int]) -> list[int]:
        if any(m < 1 for m in value):
            raise ValueError("every m must be at least 1")
        return value

    @model_validator(mode="after")
    def _truth_matches_operator(self) -> "ExperimentConfig":
        recipe_mismatch = self.truth is not None and self.truth.value != self.operator.value
        if self.coefficients is None and recipe_mismatch:
            raise ValueError(
                f"truth recipe '{self.truth.value}' does not fit operator '{self.operator.value}'"
            )
        polynomial = self.prior_family is PriorFamily.POLYNOMIAL
        if self.alpha is not None and polynomial and self.alpha <= 0:
            raise ValueError("polynomial priors need alpha > 0")
        return self

    @classmethod
    def from_file(cls, path: Path, **overrides: Any) -> "ExperimentConfig":
        """Load a key=value file; non-None ``overrides`` win over file values."""
        path = Path(path)
        if not path.is_file():
            raise ParameterError(f"Config file not found: {path}")
        names = {name.lower(): name for name in cls.model_fields}
        values: dict[str, Any] = {
            names.get(key.strip().lower(), key.strip()): value
            for key, value in dotenv_values(path).items()
            if value is not None
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @classmethod
    def from_preset(cls, name: str, **overrides: Any) -> "ExperimentConfig":
        """A published setup from ``PRESETS`` with non-None ``overrides`` applied."""
        if name not in PRESETS:
            raise ParameterError(f"Unknown preset '{name}'; choose from {', '.join(PRESETS)}")
        values = dict(PRESETS[name])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def resolved_alpha(self) -> float:
        if self.alpha is not None:
            return self.alpha
        return self.beta if self.prior_family is PriorFamily.POLYNOMIAL else 0.0

    def build_operator(self) -> ForwardSVD:
        return build_operator(self.operator.value, T=self.T)

    def build_prior(self, op: ForwardSVD) -> PriorSpectrum:
        if self.prior_family is PriorFamily.POLYNOMIAL:
            prior = PriorSpectrum.polynomial(self.resolved_alpha, 1)
        else:
            prior = PriorSpectrum.exponential(self.resolved_alpha, self.xi, self.prior_p, 1)
        J = self.truncation or choose_truncation(op, prior)
        return prior.with_truncation(J)

    def build_truth(self, op: ForwardSVD, truncation: int) -> SobolevTruth:
        """User coefficients if given, else the recipe matching the operator."""
        if self.coefficients is not None:
            return custom_truth(self.coefficients, self.beta, truncation)
        recipe = self.truth or TruthRecipe(self.operator.value)
        return make_truth(recipe, self.beta, truncation, op)

    def snapshot(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


@dataclass(frozen=True)
class ExperimentSetup:
    """Objects shared (read-only) by all replicates of a run."""

    config: ExperimentConfig
    op: ForwardSVD
    prior: PriorSpectrum
    truth: SobolevTruth
    kernel: ForwardPriorKernel
    grid: np.ndarray
    truth_values: np.ndarray

    @classmethod
    def build(cls, config: ExperimentConfig) -> "ExperimentSetup":
        """Resolve operator, truncated prior, truth and evaluation grid."""
        op = config.build_operator()
        prior = config.build_prior(op)
        truth = config.build_truth(op, prior.truncation)
        grid = op.e_basis.domain.grid(config.grid_size)
        return cls(
            config=config,
            op=op,
            prior=prior,
            truth=truth,
            kernel=ForwardPriorKernel(op, prior),
            grid=grid,
            truth_values=op.e_basis.combine(truth.series.coeffs, grid),
        )

    @property
    def truncation(self) -> int:
        return self.prior.truncation


def generate_data(
    op: ForwardSVD,
    truth: SobolevTruth,
    n: int,
    sigma2: float = 1.0,
    seed: int = 0,
) -> Dataset:
    """Design from G, signal (A f_0)(x_i), Gaussian noise; deterministic in ``seed``."""
    if truth.series.basis_tag is not BasisTag.E:
        raise ContractError("The truth must be given on the operator's e-basis")
    if sigma2 < 0:
        raise ParameterError("Noise variance must be non-negative")
    x = sample_design(op, n, seed)
    signal = np.atleast_1d(eval_series(forward_map(truth.series, op), op.g_basis, x))
    noise = math.sqrt(sigma2) * make_rng(seed, NOISE_STREAM).standard_normal(n)
    return Dataset(x=x, y=signal + noise, sigma2=sigma2, seed=seed)


@dataclass
class RunRow:
    """One fitted posterior of one replicate."""

    replicate: int
    scheme: str
    m: int
    mise: float
    sq_bias: float
    variance_mass: float
    kl: float
    elbo: float
    coverage: float
    band_width: float
    seed: int
    status: str = "ok"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunRow":
        return cls(**{f.name: data[f.name] for f in fields(cls)})

    @classmethod
    def failed(cls, replicate: int, scheme: str, m: int, seed: int, message: str) -> "RunRow":
        nan = float("nan")
        status = message if message.startswith("failed") else f"failed: {message}"
        return cls(replicate, scheme, m, nan, nan, nan, nan, nan, nan, nan, seed, status)

    @property
    def ok(self) -> bool:
        return not self.status.startswith("failed")


RUN_COLUMNS = [f.name for f in fields(RunRow)]


@dataclass
class TimingRow:
    replicate: int
    method: str
    m: int
    seconds: float

    def to_dict(self) -> dict:
        return asdict(self)


TIMING_COLUMNS = [f.name for f in fields(TimingRow)]
TIMING_SUMMARY_COLUMNS = ["method", "m", "fits", "mean_seconds", "median_seconds"]


@dataclass
class RunRecord:
    """Rows of a run plus what is needed to regenerate them."""

    config: dict[str, Any]
    truncation: int
    rows: list[RunRow] = field(default_factory=list)
    timings: list[TimingRow] = field(default_factory=list)
    version: str = __version__

    def rows_for(self, scheme: str, m: Optional[int] = None) -> list[RunRow]:
        return [r for r in self.rows if r.scheme == scheme and (m is None or r.m == m)]

    def summary(self) -> list[dict[str, Any]]:
        """Aggregates per (scheme, m) over replicates, in first-seen order."""
        groups: dict[tuple[str, int], list[RunRow]] = {}
        for row in self.rows:
            groups.setdefault((row.scheme, row.m), []).append(row)

        summary = []
        for (scheme, m), rows in groups.items():
            good = [r for r in rows if r.ok]
            entry: dict[str, Any] = {
                "scheme": scheme,
                "m": m,
                "replicates": len(rows),
                "failed": len(rows) - len(good),
            }
            for name in ("mise", "kl", "coverage", "band_width"):
                values = [getattr(r, name) for r in good]
                entry[f"mean_{name}"] = float(np.mean(values)) if values else float("nan")
            entry["median_mise"] = median(r.mise for r in good) if good else float("nan")
            summary.append(entry)
        return summary

    def timing_summary(self) -> list[dict[str, Any]]:
        """Mean and median wall-clock seconds per (method, m).

        Kept apart from ``summary`` so that file stays reproducible.
        """
        seconds: dict[tuple[str, int], list[float]] = {}
        for timing in self.timings:
            seconds.setdefault((timing.method, timing.m), []).append(timing.seconds)
        return [
            {
                "method": method,
                "m": m,
                "fits": len(times),
                "mean_seconds": float(np.mean(times)),
                "median_seconds": median(times),
            }
            for (method, m), times in seconds.items()
        ]


@dataclass(frozen=True)
class FitOutcome:
    """A fitted posterior with its scores, or the reason it could not be fitted."""

    label: str
    m: int
    posterior: Optional[GaussianPosterior] = None
    kl: float = float("nan")
    elbo: float = float("nan")
    seconds: float = float("nan")
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.posterior is not None


def effective_m_list(setup: ExperimentSetup, kind: SchemeKind) -> list[tuple[int, int]]:
    """(requested, used) m per entry of ``m_list``.

    m above J (population scheme) or n (empirical scheme) is clamped.
    """
    limit = setup.truncation if kind is SchemeKind.POPULATION else setup.config.n
    pairs = []
    for m in setup.config.m_list:
        used = min(m, limit)
        if used != m:
            logger.warning("m=%d exceeds the %s limit %d; using m=%d", m, kind.value, limit, used)
        pairs.append((m, used))
    return pairs


def _fit_scheme(
    setup: ExperimentSetup,
    kind: SchemeKind,
    m: int,
    data: Dataset,
    gram: Optional[GramSet],
) -> FitOutcome:
    start = time.perf_counter()
    if kind is SchemeKind.POPULATION:
        scheme = population_scheme(setup.op, setup.prior, data, m)
    else:
        if gram is None:
            raise InverseGPError("The empirical scheme needs the Gram matrix")
        scheme = empirical_scheme(gram, setup.kernel, m)
    params = fit_variational(scheme, data)
    post = variational_posterior(scheme, params, setup.prior, setup.op)
    seconds = time.perf_counter() - start
    kl = kl_to_posterior(scheme, data, gram) if gram is not None else float("nan")
    return FitOutcome(kind.value, m, post, kl, elbo(scheme, data, gram), seconds)


def fit_replicate(setup: ExperimentSetup, replicate: int, strict: bool = False) -> list[FitOutcome]:
    """Every fit of one replicate: exact first (if enabled), then each scheme and m.

    Numerical failures become outcomes without a posterior unless ``strict``.
    """
    config = setup.config
    seed = derive_seed(config.seed, replicate)
    data = generate_data(setup.op, setup.truth, config.n, config.sigma2, seed)
    kinds = config.scheme.kinds()
    outcomes: list[FitOutcome] = []

    def failed(label: str, m: int, exc: Exception) -> FitOutcome:
        if strict:
            raise exc
        logger.warning("Replicate %d: %s (m=%d) failed: %s", replicate, label, m, exc)
        return FitOutcome(label, m, status=f"failed: {exc}")

    gram: Optional[GramSet] = None
    gram_error: Optional[Exception] = None
    if config.exact or SchemeKind.EMPIRICAL in kinds:
        start = time.perf_counter()
        try:
            gram = build_gram(setup.op, setup.prior, data, kernel=setup.kernel)
            if config.exact:
                post = exact_posterior(setup.op, setup.prior, data, gram)
                seconds = time.perf_counter() - start
                lml = log_marginal_likelihood(data, gram)
                outcomes.append(FitOutcome("exact", data.n, post, 0.0, lml, seconds))
        except (InverseGPError, LinAlgError) as exc:
            gram_error = exc
            if config.exact:
                outcomes.append(failed("exact", data.n, exc))
            elif strict:
                raise

    for kind in kinds:
        for requested, m in effective_m_list(setup, kind):
            if kind is SchemeKind.EMPIRICAL and gram is None and gram_error is not None:
                outcomes.append(failed(kind.value, m, gram_error))
                continue
            try:
                outcome = _fit_scheme(setup, kind, m, data, gram)
            except (InverseGPError, LinAlgError) as exc:
                outcomes.append(failed(kind.value, m, exc))
                continue
            if requested != m:
                outcome = replace(outcome, status=f"clamped from {requested}")
            outcomes.append(outcome)
    return outcomes


def run_replicate(setup: ExperimentSetup, replicate: int) -> tuple[list[RunRow], list[TimingRow]]:
    """Rows and timings of one replicate; numerical failures are recorded per cell."""
    seed = derive_seed(setup.config.seed, replicate)
    rows: list[RunRow] = []
    timings: list[TimingRow] = []
    for outcome in fit_replicate(setup, replicate):
        if not outcome.ok:
            rows.append(RunRow.failed(replicate, outcome.label, outcome.m, seed, outcome.status))
            continue
        try:
            report = mise(outcome.posterior, setup.truth)
            band = credible_band(outcome.posterior, setup.grid, setup.config.band_level)
        except (InverseGPError, LinAlgError) as exc:
            rows.append(RunRow.failed(replicate, outcome.label, outcome.m, seed, str(exc)))
            continue
        rows.append(
            RunRow(
                replicate=replicate,
                scheme=outcome.label,
                m=outcome.m,
                mise=report.mise,
                sq_bias=report.sq_bias,
                variance_mass=report.variance_mass,
                kl=outcome.kl,
                elbo=outcome.elbo,
                coverage=band.coverage(setup.truth_values),
                band_width=band.mean_width,
                seed=seed,
                status=outcome.status,
            )
        )
        timings.append(TimingRow(replicate, outcome.label, outcome.m, outcome.seconds))
    return rows, timings


def run_experiment(config: ExperimentConfig) -> RunRecord:
    """Run every replicate of ``config`` on a pool of ``config.workers`` threads."""
    setup = ExperimentSetup.build(config)
    record = RunRecord(config=config.snapshot(), truncation=setup.truncation)
    logger.info(
        "Running %s: n=%d, %s, J=%d, %d replicate(s)",
        setup.op.name, config.n, setup.prior.describe(), setup.truncation, config.replicates,
    )
    collected: dict[int, tuple[list[RunRow], list[TimingRow]]] = {}
    lock = threading.Lock()

    def work(replicate: int) -> None:
        result = run_replicate(setup, replicate)
        with lock:
            collected[replicate] = result
        logger.info("Replicate %d/%d done", replicate + 1, config.replicates)

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        list(pool.map(work, range(config.replicates)))

    for replicate in range(config.replicates):
        rows, timings = collected[replicate]
        record.rows.extend(rows)
        record.timings.extend(timings)
    return record


@dataclass(frozen=True)
class BandExport:
    """Credible band of one method with the truth on the same grid."""

    method: str
    m: int
    band: CredibleBand
    truth_values: np.ndarray

    @property
    def abs_error(self) -> np.ndarray:
        return np.abs(self.band.mean - self.truth_values)


def export_bands(config: ExperimentConfig, replicate: int = 0) -> list[BandExport]:
    """Bands of every method fitted on one replicate (raises on numerical failure)."""
    setup = ExperimentSetup.build(config)
    exports = []
    for outcome in fit_replicate(setup, replicate, strict=True):
        band = credible_band(outcome.posterior, setup.grid, config.band_level)
        exports.append(BandExport(outcome.label, outcome.m, band, setup.truth_values))
    return exports


def simulate(config: ExperimentConfig, replicate: int = 0) -> Dataset:
    """The dataset replicate ``replicate`` of a run would use."""
    setup = ExperimentSetup.build(config)
    seed = derive_seed(config.seed, replicate)
    return generate_data(setup.op, setup.truth, config.n, config.sigma2, seed)


@dataclass
class PhaseGrid:
    """Mean MISE of the exact and variational posteriors over (n, m).

    Means run over the replicates whose fit succeeded; ``exact_failed`` and
    ``variational_failed`` count the others.
    """

    n_list: list[int]
    m_list: list[int]
    scheme: str
    exact_mise: np.ndarray  # (len(n_list),)
    variational_mise: np.ndarray  # (len(n_list), len(m_list))
    thresholds: list[int]
    replicates: int
    exact_failed: np.ndarray  # (len(n_list),)
    variational_failed: np.ndarray  # (len(n_list), len(m_list))

    @property
    def log_ratio(self) -> np.ndarray:
        """log(mean MISE exact / mean MISE variational)."""
        return np.log(self.exact_mise[:, None] / self.variational_mise)

    @property
    def failed(self) -> np.ndarray:
        """Failed fits behind each cell (exact plus variational)."""
        return self.exact_failed[:, None] + self.variational_failed

    def to_rows(self) -> list[dict[str, Any]]:
        ratio = self.log_ratio
        failed = self.failed
        rows = []
        for a, n in enumerate(self.n_list):
            for b, m in enumerate(self.m_list):
                rows.append(
                    {
                        "n": n,
                        "m": m,
                        "log_ratio": float(ratio[a, b]),
                        "mise_exact": float(self.exact_mise[a]),
                        "mise_variational": float(self.variational_mise[a, b]),
                        "threshold": self.thresholds[a],
                        "failed": int(failed[a, b]),
                    }
                )
        return rows


PHASE_COLUMNS = ["n", "m", "log_ratio", "mise_exact", "mise_variational", "threshold", "failed"]


def _mean_of_finite(values: np.ndarray, axis: int = 0) -> np.ndarray:
    finite = np.isfinite(values)
    counts = finite.sum(axis=axis)
    totals = np.where(finite, values, 0.0).sum(axis=axis)
    return np.where(counts > 0, totals / np.maximum(counts, 1), np.nan)


def phase_grid(
    op: ForwardSVD,
    prior: PriorSpectrum,
    truth: SobolevTruth,
    n_list: list[int],
    m_list: list[int],
    reps: int,
    seed: int = 0,
    sigma2: float = 1.0,
    scheme: SchemeKind = SchemeKind.POPULATION,
    workers: int = 1,
) -> PhaseGrid:
    """Log ratios of mean exact to mean variational MISE over a grid of (n, m).

    A numerical failure leaves NaN in its replicate and the grid carries on.
    The ``threshold`` column follows ``threshold_curve``.
    """
    if reps < 1:
        raise ParameterError("Phase grid needs reps >= 1")
    if not n_list or not m_list:
        raise ParameterError("Phase grid needs non-empty n and m lists")
    kernel = ForwardPriorKernel(op, prior)
    truth = truth.restricted(prior.truncation)
    nan = float("nan")

    def cell(index: tuple[int, int]) -> tuple[float, list[float]]:
        a, r = index
        n = n_list[a]
        data = generate_data(op, truth, n, sigma2, derive_seed(seed, a, r))
        gram: Optional[GramSet] = None
        gram_error: Optional[Exception] = None
        exact = nan
        try:
            gram = build_gram(op, prior, data, kernel=kernel)
            exact = mise(exact_posterior(op, prior, data, gram), truth).mise
        except (InverseGPError, LinAlgError) as exc:
            gram_error = exc
            logger.warning("Phase grid n=%d, replicate %d: exact fit failed: %s", n, r, exc)

        limit = prior.truncation if scheme is SchemeKind.POPULATION else n
        values = []
        for m in m_list:
            m_used = min(m, limit)
            try:
                if scheme is SchemeKind.POPULATION:
                    inducing = population_scheme(op, prior, data, m_used)
                elif gram is None:
                    raise gram_error
                else:
                    inducing = empirical_scheme(gram, kernel, m_used)
                post = variational_posterior(inducing, fit_variational(inducing, data), prior, op)
                values.append(mise(post, truth).mise)
            except (InverseGPError, LinAlgError) as exc:
                logger.warning(
                    "Phase grid n=%d, m=%d, replicate %d: %s fit failed: %s",
                    n, m, r, scheme.value, exc,
                )
                values.append(nan)
        return exact, values

    cells = [(a, r) for a in range(len(n_list)) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(cell, cells))

    exact_runs = np.full((len(n_list), reps), np.nan)
    variational_runs = np.full((len(n_list), reps, len(m_list)), np.nan)
    for (a, r), (exact_value, values) in zip(cells, results):
        exact_runs[a, r] = exact_value
        variational_runs[a, r] = values

    thresholds = [threshold_curve(op, prior, truth, n) for n in n_list]
    grid = PhaseGrid(
        n_list=list(n_list),
        m_list=list(m_list),
        scheme=scheme.value,
        exact_mise=_mean_of_finite(exact_runs, axis=1),
        variational_mise=_mean_of_finite(variational_runs, axis=1),
        thresholds=thresholds,
        replicates=reps,
        exact_failed=(~np.isfinite(exact_runs)).sum(axis=1),
        variational_failed=(~np.isfinite(variational_runs)).sum(axis=1),
    )
    failures = int(grid.exact_failed.sum() + grid.variational_failed.sum())
    if failures:
        logger.warning("Phase grid finished with %d failed fit(s)", failures)
    logger.info("Phase grid over %d sample sizes and %d values of m done", len(n_list), len(m_list))
    return grid
