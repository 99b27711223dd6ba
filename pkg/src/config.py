"""Configuration settings for the spectral GP inverse-problem toolkit."""

from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class NumericsSettings(BaseSettings):
    """Linear-algebra safeguards."""

    model_config = SettingsConfigDict(env_prefix="GPINV_NUMERICS_")

    jitter_scale: float = Field(
        default=1e-10,
        description="First jitter added to a failing Cholesky, times the mean diagonal",
    )
    jitter_max_doublings: int = Field(
        default=6, description="How many times the jitter is doubled before giving up"
    )
    eigen_clamp: float = Field(
        default=1e-10,
        description="Relative (to the trace) size of negative eigenvalues tolerated silently",
    )
    variance_tolerance: float = Field(
        default=1e-10, description="Relative size of negative posterior variances clamped to zero"
    )
    domain_tolerance: float = Field(
        default=1e-12, description="Slack allowed when checking that points lie in a domain"
    )


class TruncationSettings(BaseSettings):
    """Truncation of the spectral expansions."""

    model_config = SettingsConfigDict(env_prefix="GPINV_TRUNCATION_")

    tail_tolerance: float = Field(
        default=1e-12,
        description="Neglected forward-prior mass allowed, relative to the retained mass",
    )
    min_terms: int = Field(default=50, description="Smallest truncation J chosen automatically")
    max_terms: int = Field(default=1000, description="Largest truncation J chosen automatically")
    chunk_size: int = Field(
        default=128, description="Basis functions evaluated per block when streaming over J"
    )


class QuadratureSettings(BaseSettings):
    """Quadrature rules used for basis checks."""

    model_config = SettingsConfigDict(env_prefix="GPINV_QUADRATURE_")

    interval_factor: int = Field(default=4, description="Gauss-Legendre nodes per basis function")
    angle_factor: int = Field(default=8, description="Trapezoid nodes per basis function on angles")


class HarnessSettings(BaseSettings):
    """Experiment harness defaults."""

    model_config = SettingsConfigDict(env_prefix="GPINV_HARNESS_")

    workers: int = Field(default=1, description="Worker threads used for replicates")
    output_dir: Path = Field(default=Path("results"), description="Where run outputs are written")
    grid_size: int = Field(default=200, description="Evaluation grid size for bands and coverage")
    band_level: float = Field(default=0.95, description="Credible level of pointwise bands")
    severe_constant_factor: float = Field(
        default=2.0,
        description="Factor f in the severe m-rule ((xi + f*c)^-1 log n)^(1/p)",
    )


class Settings(BaseSettings):
    """Main application settings."""

    model_config = SettingsConfigDict(
        env_prefix="GPINV_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Nested settings
    numerics: NumericsSettings = Field(default_factory=NumericsSettings)
    truncation: TruncationSettings = Field(default_factory=TruncationSettings)
    quadrature: QuadratureSettings = Field(default_factory=QuadratureSettings)
    harness: HarnessSettings = Field(default_factory=HarnessSettings)

    # Debug settings
    debug: bool = Field(default=False, description="Enable debug logging")
    log_level: Optional[str] = Field(
        default=None, description="Explicit log level (overrides debug)"
    )

    def ensure_dirs(self, output_dir: Optional[Path] = None) -> Path:
        """Ensure the output directory exists and return it."""
        target = output_dir or self.harness.output_dir
        target.mkdir(parents=True, exist_ok=True)
        return target


# Global settings instance
settings = Settings()
