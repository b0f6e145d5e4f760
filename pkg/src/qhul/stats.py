"""Log-log linearity fits and Poissonianity classification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from qhul.noise import NoiseStats

__all__ = ["FitResult", "loglog_fit", "PoissonPoint", "poisson_check", "POISSON_BAND"]

POISSON_BAND = 0.05


@dataclass(frozen=True)
class FitResult:
    """OLS line ``log10(y) = slope * log10(x) + intercept``."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int
    residuals: np.ndarray
    slope_stderr: float

    def summary(self) -> str:
        return (f"slope={self.slope:.9g} intercept={self.intercept:.9g} "
                f"r_squared={self.r_squared:.9g} n_points={self.n_points} "
                f"slope_stderr={self.slope_stderr:.9g}")


def loglog_fit(points: Iterable[tuple[float, float]]) -> FitResult:
    """Unweighted least squares on ``(log10 x, log10 y)``.

    All coordinates must be strictly positive; drop zero-noise baselines
    before calling.
    """
    pts = np.asarray(list(points), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise ValueError("need at least 2 (x, y) points")
    if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
        raise ValueError("log-log fit needs finite, strictly positive coordinates")
    x = np.log10(pts[:, 0])
    y = np.log10(pts[:, 1])
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise ValueError("x values are all equal; slope undefined")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    yc = y - y.mean()
    ss_tot = float(yc @ yc)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    n = len(x)
    stderr = math.sqrt(ss_res / (n - 2) / sxx) if n > 2 else math.nan
    return FitResult(slope, intercept, r2, n, resid, stderr)


class PoissonPoint(NamedTuple):
    mean: float
    variance: float
    ratio: float
    label: str  # "sub", "poisson", "super" or "skipped"


def classify_ratio(ratio: float, band: float = POISSON_BAND) -> str:
    if ratio < 1.0 - band:
        return "sub"
    if ratio > 1.0 + band:
        return "super"
    return "poisson"


def poisson_check(stats: NoiseStats | Iterable[tuple[float, float]],
                  band: float = POISSON_BAND) -> list[PoissonPoint]:
    """Variance-to-mean ratio of each (mean, variance) point with its class.

    Accepts a :class:`NoiseStats` (one point per pixel) or explicit pairs.
    Points with zero mean have no ratio and are labelled ``"skipped"``.
    """
    pts = stats.points if isinstance(stats, NoiseStats) else np.asarray(list(stats), dtype=np.float64)
    out = []
    for mean, var in pts:
        if mean == 0:
            out.append(PoissonPoint(float(mean), float(var), math.nan, "skipped"))
            continue
        ratio = float(var / mean)
        out.append(PoissonPoint(float(mean), float(var), ratio, classify_ratio(ratio, band)))
    return out
