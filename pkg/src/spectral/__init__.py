"""Spectral representations: bases, measures, priors and forward operators."""

from .measures import basis_gram, integrate, orthonormality_defect
from .model import (
    BasisTag,
    Domain,
    ForwardSVD,
    Illposedness,
    IllposednessKind,
    Measure,
    PriorFamily,
    PriorSpectrum,
    SeriesFunction,
    SobolevTruth,
    SpectralBasis,
    choose_truncation,
    eval_series,
    forward_map,
    sobolev_norm,
)
from .operators import OperatorName, build_operator, heat, radon, sample_design, volterra

__all__ = [
    "BasisTag",
    "Domain",
    "ForwardSVD",
    "Illposedness",
    "IllposednessKind",
    "Measure",
    "PriorFamily",
    "PriorSpectrum",
    "SeriesFunction",
    "SobolevTruth",
    "SpectralBasis",
    "choose_truncation",
    "eval_series",
    "forward_map",
    "sobolev_norm",
    "basis_gram",
    "integrate",
    "orthonormality_defect",
    "OperatorName",
    "build_operator",
    "heat",
    "radon",
    "sample_design",
    "volterra",
]
