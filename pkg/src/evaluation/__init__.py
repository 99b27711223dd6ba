"""Evaluation functionals for posteriors."""

from .metrics import (
    CredibleBand,
    MiseReport,
    RateEstimate,
    credible_band,
    mise,
    mise_monte_carlo,
    rate_slope,
    recommended_m,
    theory_exponent,
    threshold_curve,
)

__all__ = [
    "CredibleBand",
    "MiseReport",
    "RateEstimate",
    "credible_band",
    "mise",
    "mise_monte_carlo",
    "rate_slope",
    "recommended_m",
    "theory_exponent",
    "threshold_curve",
]
