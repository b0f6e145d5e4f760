"""Deterministic CSV / PFM writers for experiment outputs.

Every text file starts with one ``#`` provenance line. Floats use nine
significant digits, ``,`` separators and LF line endings, so identical runs
give byte-identical files.
"""

from __future__ import annotations

import csv
import math
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from qhul import __version__
from qhul.imageio import write_pfm
from qhul.noise import NoiseStats
from qhul.pipeline import ExperimentReport, SweepPoint
from qhul.stats import FitResult, PoissonPoint

__all__ = [
    "fmt",
    "provenance_line",
    "OutputDir",
]


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.9g}"


def provenance_line(command: str, config_hash: str, seed: int, **extra) -> str:
    parts = [f"qhul version={__version__}", f"command={command}", f"config_hash={config_hash}",
             f"seed={seed}"]
    parts += [f"{k}={fmt(v) if not isinstance(v, str) else v}" for k, v in extra.items()]
    return "# " + " ".join(parts)


class OutputDir:
    """Output directory that stamps every file with the same provenance line."""

    def __init__(self, path: str | os.PathLike, provenance: str):
        self.path = Path(path)
        self.provenance = provenance
        self.written: list[Path] = []
        try:
            self.path.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {self.path}: {exc}") from exc
        if not os.access(self.path, os.W_OK):
            raise OSError(f"output directory {self.path} is not writable")

    def csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        path = self.path / name
        with open(path, "w", newline="", encoding="utf-8") as f:
            f.write(self.provenance + "\n")
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
        self.written.append(path)
        return path

    def text(self, name: str, body: str) -> Path:
        path = self.path / name
        with open(path, "w", newline="", encoding="utf-8") as f:
            f.write(self.provenance + "\n")
            f.write(body if body.endswith("\n") else body + "\n")
        self.written.append(path)
        return path

    def pfm(self, name: str, image: np.ndarray) -> Path:
        path = self.path / name
        write_pfm(path, image)
        self.written.append(path)
        return path

    def manifest(self) -> Path:
        """List binary outputs (which cannot carry a comment line) with the provenance."""
        names = sorted(p.name for p in self.written)
        return self.text("manifest.txt", "\n".join(names))

    # -- module-specific tables ---------------------------------------------

    def noise_stats(self, name: str, stats: NoiseStats) -> Path:
        h, w = stats.mean.shape
        rows = ((x, y, stats.mean[y, x], stats.variance[y, x]) for y in range(h) for x in range(w))
        return self.csv(name, ("pixel_x", "pixel_y", "mean", "variance"), rows)

    def sweep(self, name: str, points: Sequence[SweepPoint], variance_sweep: bool = False) -> Path:
        header = ["r", "noise_variance", "mean_visibility", "phase_rmse", "mean_phase_variance",
                  "noise_mean", "predicted_phase_variance"]
        if variance_sweep:
            header = ["mode_count"] + header + ["measured_noise_mean", "measured_noise_variance"]
        rows = []
        for p in points:
            row = [p.ratio, p.noise_variance, p.mean_visibility, p.phase_rmse,
                   p.mean_phase_variance, p.noise_mean, p.predicted_phase_variance]
            if variance_sweep:
                row = [p.mode_count] + row + [p.measured_noise_mean, p.measured_noise_variance]
            rows.append(row)
        return self.csv(name, header, rows)

    def cut(self, name: str, report: ExperimentReport) -> Path:
        return self.csv(name, ("column", "phase"), enumerate(report.cut.tolist()))

    def maps(self, prefix: str, report: ExperimentReport) -> None:
        self.pfm(f"{prefix}_phase.pfm", report.mean_phase)
        self.pfm(f"{prefix}_visibility.pfm", report.mean_visibility_map)
        if not np.all(np.isnan(report.phase_variance)):
            self.pfm(f"{prefix}_phase_variance.pfm", report.phase_variance)

    def fits(self, name: str, fits: dict[int, FitResult | None]) -> Path:
        rows = []
        for modes, fit in fits.items():
            if fit is None:
                rows.append([modes, math.nan, math.nan, math.nan, 0, math.nan])
            else:
                rows.append([modes, fit.slope, fit.intercept, fit.r_squared, fit.n_points,
                             fit.slope_stderr])
        return self.csv(name, ("mode_count", "slope", "intercept", "r_squared", "n_points",
                               "slope_stderr"), rows)

    def poisson_table(self, name: str, labelled: Sequence[tuple[str, PoissonPoint]]) -> Path:
        rows = [[cfg, p.mean, p.variance, p.ratio, p.label] for cfg, p in labelled]
        return self.csv(name, ("configuration", "mean", "variance", "variance_over_mean", "class"),
                        rows)
