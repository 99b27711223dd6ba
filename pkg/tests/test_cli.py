"""Tests for the command-line entry points."""

import pytest
from rich.console import Console

from src.errors import NumericalError
from src.interfaces import cli
from src.interfaces.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, load_config, run_cli
from src.main import build_parser, check_operators, main

SMALL = ["--operator", "volterra", "--n", "20", "--m", "2,3", "--truncation", "8"]


def run(argv):
    args = build_parser().parse_args(argv)
    return run_cli(args, Console(file=None, quiet=True))


class TestParser:
    def test_flags_map_to_config(self, tmp_path):
        args = build_parser().parse_args(
            ["fit", *SMALL, "--exact", "off", "--T", "0.05", "--out", str(tmp_path)]
        )
        config = load_config(args)
        assert config.m_list == [2, 3]
        assert config.exact is False
        assert config.T == 0.05
        assert config.output_dir == tmp_path

    def test_preset_with_override(self):
        args = build_parser().parse_args(["experiment", "--preset", "heat", "--reps", "3"])
        config = load_config(args)
        assert config.replicates == 3
        assert config.operator.value == "heat"

    @pytest.mark.parametrize(
        "argv",
        [
            ["fit", "--m", "3,x"],
            ["fit", "--exact", "maybe"],
            ["fit", "--operator", "deconvolution"],
            [],
        ],
    )
    def test_rejected_by_argparse(self, argv):
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(argv)
        assert info.value.code == 2


class TestRunCli:
    def test_fit(self, tmp_path):
        assert run(["fit", *SMALL, "--out", str(tmp_path)]) == EXIT_OK

    def test_experiment_writes_outputs(self, tmp_path):
        assert run(["experiment", *SMALL, "--reps", "2", "--out", str(tmp_path)]) == EXIT_OK
        for name in ("runs.csv", "summary.csv", "timings.csv", "timing_summary.csv"):
            assert (tmp_path / name).exists()

    def test_simulate(self, tmp_path):
        assert run(["simulate", *SMALL, "--out", str(tmp_path)]) == EXIT_OK
        assert len((tmp_path / "data.csv").read_text(encoding="utf-8").splitlines()) == 21

    def test_band(self, tmp_path):
        argv = ["band", *SMALL, "--grid-size", "25", "--out", str(tmp_path)]
        assert run(argv) == EXIT_OK
        assert (tmp_path / "bands.csv").exists()

    def test_phase_grid(self, tmp_path):
        argv = ["phase-grid", *SMALL, "--n-list", "10,20", "--reps", "1", "--out", str(tmp_path)]
        assert run(argv) == EXIT_OK
        lines = (tmp_path / "phase_grid.csv").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1 + 2 * 2

    @pytest.mark.parametrize(
        "argv",
        [
            ["fit", "--beta", "-1"],
            ["fit", "--preset", "deconvolution"],
            ["fit", "--preset", "heat", "--config", "run.env"],
            ["fit", "--operator", "heat", "--T", "0"],
            ["fit", "--config", "does-not-exist.cfg"],
        ],
    )
    def test_invalid_configuration(self, argv):
        assert run(argv) == EXIT_CONFIG

    def test_numerical_failure(self, tmp_path, monkeypatch):
        def broken(*args, **kwargs):
            raise NumericalError("Cholesky failed", {"min_eigenvalue": -1.0})

        monkeypatch.setattr(cli, "fit_replicate", broken)
        assert run(["fit", *SMALL, "--out", str(tmp_path)]) == EXIT_NUMERICAL


class TestMain:
    def test_check_passes(self):
        assert check_operators(5) == 0

    def test_main_exits_with_code(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["simulate", *SMALL, "--out", str(tmp_path)])
        assert info.value.code == 0

    def test_main_check(self):
        with pytest.raises(SystemExit) as info:
            main(["check", "--terms", "4"])
        assert info.value.code == 0
