"""Simulation harness: truths, synthetic data and replicated experiments."""

from .experiment import (
    PRESETS,
    BandExport,
    ExperimentConfig,
    ExperimentSetup,
    PhaseGrid,
    RunRecord,
    RunRow,
    SchemeChoice,
    TimingRow,
    export_bands,
    generate_data,
    phase_grid,
    run_experiment,
    run_replicate,
    simulate,
)
from .truths import TruthRecipe, custom_truth, make_truth, recipe_coefficients

__all__ = [
    "TruthRecipe",
    "custom_truth",
    "make_truth",
    "recipe_coefficients",
    "PRESETS",
    "BandExport",
    "ExperimentConfig",
    "ExperimentSetup",
    "PhaseGrid",
    "RunRecord",
    "RunRow",
    "SchemeChoice",
    "TimingRow",
    "export_bands",
    "generate_data",
    "phase_grid",
    "run_experiment",
    "run_replicate",
    "simulate",
]
