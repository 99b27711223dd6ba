"""Run outputs as plot-ready CSV files with a JSON manifest."""

import csv
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable, Optional

from ..config import settings
from ..gp.exact import Dataset
from ..harness.experiment import (
    PHASE_COLUMNS,
    RUN_COLUMNS,
    TIMING_COLUMNS,
    TIMING_SUMMARY_COLUMNS,
    BandExport,
    PhaseGrid,
    RunRecord,
    RunRow,
)

logger = logging.getLogger(__name__)

RUNS_FILE = "runs.csv"
TIMINGS_FILE = "timings.csv"
TIMING_SUMMARY_FILE = "timing_summary.csv"
SUMMARY_FILE = "summary.csv"
MANIFEST_FILE = "manifest.json"
PHASE_FILE = "phase_grid.csv"
BANDS_FILE = "bands.csv"
DATA_FILE = "data.csv"

_FLOAT_COLUMNS = ("mise", "sq_bias", "variance_mass", "kl", "elbo", "coverage", "band_width")


def _point_columns(dim: int) -> list[str]:
    return ["t"] if dim == 1 else ["r", "theta"]


def _point_values(point: Any) -> list[float]:
    if hasattr(point, "__len__"):
        return [float(v) for v in point]
    return [float(point)]


class ResultStorage:
    """Writes and reads the files of one output directory."""

    def __init__(self, output_dir: Optional[Path] = None):
        """Initialize storage.

        Args:
            output_dir: Directory for the run files.
                        Defaults to ``settings.harness.output_dir``.
        """
        self.output_dir = settings.ensure_dirs(output_dir)

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def _write_csv(self, name: str, columns: list[str], rows: Iterable[dict]) -> Path:
        file_path = self.path(name)
        with open(file_path, "w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=columns)
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
        logger.info("Wrote %s", file_path)
        return file_path

    def _read_csv(self, name: str) -> list[dict[str, str]]:
        with open(self.path(name), "r", encoding="utf-8", newline="") as f:
            return list(csv.DictReader(f))

    def save_manifest(
        self, config: dict[str, Any], version: str, truncation: int, **extra: Any
    ) -> Path:
        """Write manifest.json.

        Args:
            config: Config snapshot the run can be rebuilt from.
            version: Package version that produced the files.
            truncation: Number of basis terms J.
            **extra: Additional top-level entries (e.g. the phase-grid axes).

        Returns:
            Path of the written manifest.
        """
        file_path = self.path(MANIFEST_FILE)
        manifest = {
            "config": config,
            "version": version,
            "truncation": truncation,
            "created_at": datetime.now().isoformat(),
            **extra,
        }
        with open(file_path, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, ensure_ascii=False)
        return file_path

    def load_manifest(self) -> dict[str, Any]:
        with open(self.path(MANIFEST_FILE), "r", encoding="utf-8") as f:
            return json.load(f)

    def save_run(self, record: RunRecord) -> list[Path]:
        """runs.csv, summary.csv, timings.csv, timing_summary.csv and the manifest.

        Wall-clock values only go to the two timing files.
        """
        summary = record.summary()
        summary_columns = list(summary[0]) if summary else ["scheme", "m"]
        return [
            self._write_csv(RUNS_FILE, RUN_COLUMNS, (row.to_dict() for row in record.rows)),
            self._write_csv(SUMMARY_FILE, summary_columns, summary),
            self._write_csv(TIMINGS_FILE, TIMING_COLUMNS, (t.to_dict() for t in record.timings)),
            self._write_csv(TIMING_SUMMARY_FILE, TIMING_SUMMARY_COLUMNS, record.timing_summary()),
            self.save_manifest(record.config, record.version, record.truncation),
        ]

    def load_run(self) -> RunRecord:
        """Run record from runs.csv and the manifest (timings are not reloaded)."""
        manifest = self.load_manifest()
        rows = []
        for raw in self._read_csv(RUNS_FILE):
            values: dict[str, Any] = dict(raw)
            for name in ("replicate", "m", "seed"):
                values[name] = int(values[name])
            for name in _FLOAT_COLUMNS:
                values[name] = float(values[name])
            rows.append(RunRow.from_dict(values))
        return RunRecord(
            config=manifest["config"],
            truncation=manifest["truncation"],
            rows=rows,
            version=manifest.get("version", ""),
        )

    def save_phase_grid(
        self, grid: PhaseGrid, config: dict[str, Any], version: str, truncation: int
    ) -> list[Path]:
        """phase_grid.csv plus a manifest carrying the n and m axes."""
        return [
            self._write_csv(PHASE_FILE, PHASE_COLUMNS, grid.to_rows()),
            self.save_manifest(config, version, truncation, n_list=grid.n_list, m_list=grid.m_list),
        ]

    def save_bands(self, exports: list[BandExport]) -> Path:
        """Grid, mean, lower, upper, truth and |mean - truth| per method."""
        dim = exports[0].band.grid.ndim if exports else 1
        coords = _point_columns(dim)
        columns = ["method", "m", *coords, "mean", "lower", "upper", "truth", "abs_error"]

        def rows() -> Iterable[dict]:
            for export in exports:
                band = export.band
                errors = export.abs_error
                for k, point in enumerate(band.grid):
                    row = {"method": export.method, "m": export.m}
                    row.update(zip(coords, _point_values(point)))
                    row.update(
                        mean=float(band.mean[k]),
                        lower=float(band.lower[k]),
                        upper=float(band.upper[k]),
                        truth=float(export.truth_values[k]),
                        abs_error=float(errors[k]),
                    )
                    yield row

        return self._write_csv(BANDS_FILE, columns, rows())

    def save_dataset(self, data: Dataset) -> Path:
        """data.csv with the design points and observations."""
        coords = ["x"] if data.x.ndim == 1 else ["s", "phi"]
        columns = [*coords, "y"]

        def rows() -> Iterable[dict]:
            for point, value in zip(data.x, data.y):
                row = dict(zip(coords, _point_values(point)))
                row["y"] = float(value)
                yield row

        return self._write_csv(DATA_FILE, columns, rows())
