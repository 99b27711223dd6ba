"""Terminal commands: simulate, fit, experiment, phase-grid and band."""

import argparse
import logging
import math
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from .. import __version__
from ..errors import ContractError, DomainError, NumericalError, ParameterError
from ..evaluation.metrics import mise, recommended_m
from ..gp.variational import SchemeKind
from ..harness.experiment import (
    ExperimentConfig,
    ExperimentSetup,
    RunRecord,
    export_bands,
    fit_replicate,
    phase_grid,
    run_experiment,
    simulate,
)
from ..storage.results import ResultStorage

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

# CLI flag -> ExperimentConfig field
_FLAG_FIELDS = {
    "operator": "operator",
    "n": "n",
    "m": "m_list",
    "beta": "beta",
    "alpha": "alpha",
    "xi": "xi",
    "T": "T",
    "prior": "prior_family",
    "reps": "replicates",
    "seed": "seed",
    "sigma2": "sigma2",
    "scheme": "scheme",
    "exact": "exact",
    "truncation": "truncation",
    "grid_size": "grid_size",
    "level": "band_level",
    "workers": "workers",
    "out": "output_dir",
}


def _fmt(value: float, digits: int = 4) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    return f"{value:.{digits}g}"


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file or preset, overridden by any flag given on the command line."""
    overrides: dict[str, Any] = {}
    for flag, name in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "config", None) and getattr(args, "preset", None):
        raise ParameterError("Use either --config or --preset, not both")
    if getattr(args, "config", None):
        return ExperimentConfig.from_file(Path(args.config), **overrides)
    if getattr(args, "preset", None):
        return ExperimentConfig.from_preset(args.preset, **overrides)
    return ExperimentConfig(**overrides)


class ExperimentCLI:
    """Runs one command and renders its results in the terminal."""

    def __init__(self, config: ExperimentConfig, console: Optional[Console] = None):
        self.config = config
        self.console = console or Console()

    def _storage(self) -> ResultStorage:
        return ResultStorage(self.config.output_dir)

    def _print_header(self, title: str, setup: ExperimentSetup) -> None:
        self.console.print()
        self.console.print(f"[bold]{title}[/bold]")
        self.console.print(
            f"[dim]{setup.op.name}, n={self.config.n}, {setup.prior.describe()}, "
            f"beta={self.config.beta:g}, sigma2={self.config.sigma2:g}[/dim]"
        )

    def simulate(self) -> int:
        data = simulate(self.config)
        path = self._storage().save_dataset(data)
        self.console.print(f"[green]Wrote {data.n} observations to {path}[/green]")
        return EXIT_OK

    def fit(self) -> int:
        """Single replicate; numerical failures propagate (exit code 3)."""
        setup = ExperimentSetup.build(self.config)
        self._print_header("Single fit", setup)
        table = Table(show_header=True)
        table.add_column("Method", style="cyan")
        table.add_column("m", justify="right")
        table.add_column("MISE", justify="right")
        table.add_column("Bias^2", justify="right")
        table.add_column("Variance", justify="right")
        table.add_column("KL", justify="right")
        table.add_column("ELBO", justify="right")
        table.add_column("Seconds", justify="right")
        for outcome in fit_replicate(setup, 0, strict=True):
            report = mise(outcome.posterior, setup.truth)
            table.add_row(
                outcome.label,
                str(outcome.m),
                _fmt(report.mise),
                _fmt(report.sq_bias),
                _fmt(report.variance_mass),
                _fmt(outcome.kl),
                _fmt(outcome.elbo, 8),
                _fmt(outcome.seconds, 3),
            )
        self.console.print(table)
        if self.config.n >= 2:
            self.console.print(
                f"Recommended m: [bold]{recommended_m(setup.op, setup.prior, self.config.n)}[/bold]"
            )
        return EXIT_OK

    def experiment(self) -> int:
        """Run all replicates and write the run files."""
        record = run_experiment(self.config)
        self._storage().save_run(record)
        self._print_summary(record)
        return EXIT_OK

    def _print_summary(self, record: RunRecord) -> None:
        title = f"{record.config['operator']} (J={record.truncation})"
        table = Table(show_header=True, title=title)
        table.add_column("Scheme", style="cyan")
        table.add_column("m", justify="right")
        table.add_column("Runs", justify="right")
        table.add_column("Median MISE", justify="right")
        table.add_column("Mean KL", justify="right")
        table.add_column("Coverage", justify="right")
        table.add_column("Band width", justify="right")
        table.add_column("Seconds", justify="right")
        seconds = {(t["method"], t["m"]): t["mean_seconds"] for t in record.timing_summary()}
        for entry in record.summary():
            runs = str(entry["replicates"])
            if entry["failed"]:
                runs += f" [red]({entry['failed']} failed)[/red]"
            table.add_row(
                entry["scheme"],
                str(entry["m"]),
                runs,
                _fmt(entry["median_mise"]),
                _fmt(entry["mean_kl"]),
                _fmt(entry["mean_coverage"], 3),
                _fmt(entry["mean_band_width"]),
                _fmt(seconds.get((entry["scheme"], entry["m"]), float("nan")), 3),
            )
        self.console.print(table)

    def phase_grid(self, n_list: list[int]) -> int:
        """log MISE ratios over n_list x m_list, written to phase_grid.csv."""
        setup = ExperimentSetup.build(self.config)
        kind = self.config.scheme.kinds()[0]
        if len(self.config.scheme.kinds()) > 1:
            logger.warning("Phase grid uses one scheme; running %s", kind.value)
        grid = phase_grid(
            setup.op,
            setup.prior,
            setup.truth,
            n_list,
            self.config.m_list,
            self.config.replicates,
            seed=self.config.seed,
            sigma2=self.config.sigma2,
            scheme=SchemeKind(kind),
            workers=self.config.workers,
        )
        self._storage().save_phase_grid(grid, self.config.snapshot(), __version__, setup.truncation)

        table = Table(show_header=True, title="log(MISE exact / MISE variational)")
        table.add_column("n", justify="right", style="cyan")
        table.add_column("threshold", justify="right")
        for m in grid.m_list:
            table.add_column(f"m={m}", justify="right")
        for a, n in enumerate(grid.n_list):
            table.add_row(str(n), str(grid.thresholds[a]), *(f"{v:.3f}" for v in grid.log_ratio[a]))
        self.console.print(table)
        return EXIT_OK

    def band(self) -> int:
        """Credible bands of every method on replicate 0."""
        exports = export_bands(self.config)
        path = self._storage().save_bands(exports)
        table = Table(show_header=True)
        table.add_column("Method", style="cyan")
        table.add_column("m", justify="right")
        table.add_column("Mean width", justify="right")
        table.add_column("Coverage", justify="right")
        table.add_column("Max |error|", justify="right")
        for export in exports:
            table.add_row(
                export.method,
                str(export.m),
                _fmt(export.band.mean_width),
                _fmt(export.band.coverage(export.truth_values), 3),
                _fmt(float(export.abs_error.max())),
            )
        self.console.print(table)
        self.console.print(f"[green]Band data written to {path}[/green]")
        return EXIT_OK


def run_cli(args: argparse.Namespace, console: Optional[Console] = None) -> int:
    """Run the command in ``args`` and return the process exit code."""
    console = console or Console(stderr=True)
    try:
        config = load_config(args)
    except (ValidationError, ParameterError, ContractError, OSError) as exc:
        console.print(f"[red]Invalid configuration:[/red] {exc}")
        return EXIT_CONFIG

    cli = ExperimentCLI(config, Console())
    try:
        if args.command == "simulate":
            return cli.simulate()
        if args.command == "fit":
            return cli.fit()
        if args.command == "experiment":
            return cli.experiment()
        if args.command == "phase-grid":
            return cli.phase_grid(args.n_list)
        if args.command == "band":
            return cli.band()
    except (ParameterError, ContractError, DomainError) as exc:
        console.print(f"[red]Invalid parameters:[/red] {exc}")
        return EXIT_CONFIG
    except NumericalError as exc:
        console.print(f"[red]Numerical failure:[/red] {exc}")
        return EXIT_NUMERICAL
    raise ParameterError(f"Unknown command '{args.command}'")
