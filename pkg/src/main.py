"""Main entry point for the spectral GP inverse-problem toolkit."""

import argparse
import logging
import sys
from typing import Optional

from .config import settings


def _int_list(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        message = f"expected comma-separated integers, got '{text}'"
        raise argparse.ArgumentTypeError(message) from exc


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def configure_logging(debug: bool = False) -> None:
    """Route package logging through rich."""
    from rich.logging import RichHandler

    level = settings.log_level or ("DEBUG" if debug or settings.debug else "INFO")
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, show_path=False)],
        force=True,
    )


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Flat key=value experiment file")
    parser.add_argument("--preset", help="Named setup: heat, volterra, radon-500, radon-5000")
    parser.add_argument("--operator", choices=["volterra", "heat", "radon"])
    parser.add_argument("--n", type=int, help="Sample size")
    parser.add_argument("--m", type=_int_list, help="Inducing-variable counts, e.g. 3,6,12")
    parser.add_argument("--beta", type=float, help="Smoothness of the true function")
    parser.add_argument("--alpha", type=float, help="Prior regularity (defaults to beta)")
    parser.add_argument("--xi", type=float, help="Exponential-prior rate")
    parser.add_argument("--T", type=float, help="Diffusion time of the heat equation")
    parser.add_argument("--prior", choices=["polynomial", "exponential"], help="Prior family")
    parser.add_argument("--reps", type=int, help="Number of replicates")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--sigma2", type=float, help="Noise variance (default: 1)")
    parser.add_argument("--scheme", choices=["population", "empirical", "both"])
    parser.add_argument("--exact", type=_on_off, help="Fit the exact posterior too: on|off")
    parser.add_argument("--truncation", type=int, help="Series truncation J (default: automatic)")
    parser.add_argument("--grid-size", type=int, help="Evaluation grid size")
    parser.add_argument("--level", type=float, help="Credible level of the bands")
    parser.add_argument("--workers", type=int, help="Worker threads")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Exact and variational GP posteriors for linear inverse problems",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  gp-inverse fit --operator volterra --n 500 --m 4,8
  gp-inverse experiment --preset heat --reps 10 --out results/heat
  gp-inverse phase-grid --operator volterra --n-list 200,500,1000 --m 1,2,3,4,5,6
  gp-inverse band --preset radon-500 --out results/radon
  gp-inverse check
        """,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("simulate", "Generate one synthetic dataset"),
        ("fit", "Fit one replicate and print MISE / KL"),
        ("experiment", "Run all replicates and write CSV summaries"),
        ("band", "Export credible-band data"),
    ):
        _add_run_options(commands.add_parser(name, help=help_text))

    grid = commands.add_parser("phase-grid", help="Log MISE ratios over a grid of (n, m)")
    _add_run_options(grid)
    grid.add_argument(
        "--n-list", type=_int_list, default=[200, 500, 1000, 2000], help="Sample sizes"
    )

    check = commands.add_parser("check", help="Verify the singular systems of the operators")
    check.add_argument("--terms", type=int, default=10, help="Basis functions checked per operator")
    check.add_argument("--debug", action="store_true", help="Enable debug logging")
    return parser


def main(argv: Optional[list[str]] = None) -> None:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    configure_logging(args.debug)

    if args.command == "check":
        sys.exit(check_operators(args.terms))

    from .interfaces.cli import run_cli

    sys.exit(run_cli(args))


def check_operators(terms: int = 10) -> int:
    """Check orthonormality and A e_j = kappa_j g_j for every operator."""
    import numpy as np
    from rich.console import Console
    from rich.table import Table

    from .spectral.measures import orthonormality_defect
    from .spectral.operators import OperatorName, build_operator

    console = Console()
    console.print("\n[bold]Singular System Check[/bold]\n")

    table = Table(show_header=True)
    table.add_column("Operator", style="cyan")
    table.add_column("Status", style="green")
    table.add_column("e-basis defect", justify="right")
    table.add_column("g-basis defect", justify="right")
    table.add_column("max |A e_j - kappa_j g_j|", justify="right")

    failures = 0
    for name in OperatorName:
        op = build_operator(name.value)
        e_defect = orthonormality_defect(op.e_basis, op.parameter_measure, terms)
        g_defect = orthonormality_defect(op.g_basis, op.design_measure, terms)
        points = op.design_measure.sample(64, np.random.default_rng(0))
        kappas = op.kappas(terms)
        residual = 0.0
        for j in range(1, terms + 1):
            image = op.apply_formula(lambda t, j=j: op.e_basis(j, t), points)
            expected = kappas[j - 1] * op.g_basis(j, points)
            residual = max(residual, float(np.max(np.abs(image - expected))))
        ok = max(e_defect, g_defect) < 1e-6 and residual < 1e-5
        failures += not ok
        table.add_row(
            name.value,
            "✓" if ok else "✗",
            f"{e_defect:.1e}",
            f"{g_defect:.1e}",
            f"{residual:.1e}",
        )

    console.print(table)
    console.print()
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    main()
