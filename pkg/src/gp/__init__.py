"""Exact and variational Gaussian-process posteriors for linear inverse problems."""

from .exact import (
    Dataset,
    GaussianPosterior,
    GramSet,
    PosteriorKind,
    build_gram,
    exact_posterior,
    log_marginal_likelihood,
    robust_cholesky,
)
from .kernels import ForwardPriorKernel
from .variational import (
    GapSummary,
    InducingScheme,
    SchemeKind,
    VariationalParams,
    elbo,
    empirical_scheme,
    fit_variational,
    kl_to_posterior,
    population_scheme,
    trace_and_norm_gap,
    variational_posterior,
)

__all__ = [
    "ForwardPriorKernel",
    "Dataset",
    "GramSet",
    "GaussianPosterior",
    "PosteriorKind",
    "build_gram",
    "exact_posterior",
    "log_marginal_likelihood",
    "robust_cholesky",
    "GapSummary",
    "InducingScheme",
    "SchemeKind",
    "VariationalParams",
    "elbo",
    "empirical_scheme",
    "fit_variational",
    "kl_to_posterior",
    "population_scheme",
    "trace_and_norm_gap",
    "variational_posterior",
]
