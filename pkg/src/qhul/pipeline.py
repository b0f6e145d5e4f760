"""Acquire noisy phase-stepped frame stacks, distill them and score the result.

Seeding: frame ``(i, j)`` (repeat ``i``, step ``j``) of a stack draws its
signal photons from ``derive_seed(seed, 0, i, j)`` and its background from
``derive_seed(seed, 1, i, j)``. Sweep point ``k`` uses
``derive_seed(seed, 2, k)`` as its own stack seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from qhul.holography import (
    DEFAULT_VISIBILITY_FLOOR,
    ReconstructionResult,
    circular_mean,
    predict_phase_variance,
    reconstruct,
    wrap_phase_error,
)
from qhul.model import SceneObject, SourceParams, derive_seed, expected_frame, sample_quantum_frame
from qhul.noise import (
    NoiseModel,
    characterize_noise,
    noise_moments,
    pixel_moments,
    sample_noise_frame,
    speckle_mean_for_variance,
)
from qhul.stats import FitResult, loglog_fit

__all__ = [
    "FrameStack",
    "ExperimentReport",
    "SweepPoint",
    "snr_ratio",
    "noise_mean_for_ratio",
    "run_acquisition",
    "distill",
    "signal_trace",
    "resilience_sweep",
    "variance_sweep",
]

STREAM_SIGNAL = 0
STREAM_NOISE = 1
STREAM_SWEEP = 2
STREAM_NOISE_STATS = 3


@dataclass(frozen=True)
class FrameStack:
    """``n x M`` camera frames; ``frames[i, j]`` was taken at ``phase_steps[j]``."""

    frames: np.ndarray  # (n, M, height, width)
    phase_steps: tuple[float, ...]
    scene: SceneObject
    source: SourceParams
    noise: NoiseModel
    seed: int
    sampled: bool = True

    @property
    def repeats(self) -> int:
        return self.frames.shape[0]

    @property
    def m_steps(self) -> int:
        return self.frames.shape[1]

    @property
    def provenance(self) -> dict:
        return {
            "scene": self.scene.name,
            "s0": self.source.s0,
            "gamma": self.source.gamma,
            "steps": self.m_steps,
            "repeats": self.repeats,
            "noise": self.noise.describe(),
            "seed": self.seed,
            "sampled": self.sampled,
        }


@dataclass(frozen=True)
class ExperimentReport:
    """Distillation outcome of one frame stack, scored against the true scene."""

    results: list[ReconstructionResult]
    mean_phase: np.ndarray
    phase_variance: np.ndarray  # per-pixel, over repeats; NaN when n == 1
    predicted_phase_variance: np.ndarray  # single-acquisition prediction; NaN where V == 0
    mean_visibility_map: np.ndarray
    phase_rmse: float
    mean_visibility: float
    mean_phase_variance: float
    snr: float
    noise_variance: float
    cut_row: int
    cut: np.ndarray
    low_confidence: np.ndarray
    amplitude: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)


def noise_mean_for_ratio(src: SourceParams, ratio: float) -> float:
    """Noise mean giving ``ratio = noise mean : mean signal intensity``."""
    if ratio < 0:
        raise ValueError("ratio must be >= 0")
    return ratio * 2.0 * src.s0


def snr_ratio(scene: SceneObject, src: SourceParams, noise: NoiseModel) -> float:
    """Noise mean over the phase-averaged signal mean ``2 s0`` (252 means 1:252).

    The signal mean is the midpoint of the fringe, ``(min + max) / 2``, which
    does not depend on the scene. With a spatial mask, the mask's mean over
    the scene is used.
    """
    if not src.s0 > 0:
        raise ValueError("s0 must be positive")
    mu, _ = noise_moments(noise)
    if noise.spatial_mask is not None and noise.kind != "off":
        mu, _ = pixel_moments(noise, scene.shape)
        mu = float(np.mean(mu)) if mu.size else 0.0
    return mu / (2.0 * src.s0)


def run_acquisition(scene: SceneObject, src: SourceParams, noise: NoiseModel,
                    seed: int | None = None, sample: bool = True) -> FrameStack:
    """Simulate ``src.repeats`` rounds of ``M`` phase-stepped frames.

    Each frame is a signal draw plus an independent background draw. With
    ``sample=False`` the frames hold the expected counts of signal plus
    background instead (a noiseless debugging mode).
    """
    seed = src.seed if seed is None else int(seed)
    n, m = src.repeats, src.m_steps
    h, w = scene.shape
    if not sample:
        bg, _ = pixel_moments(noise, scene.shape)
        one = np.stack([expected_frame(scene, src, d) + bg for d in src.phase_steps])
        frames = np.broadcast_to(one, (n, m, h, w)).copy()
        return FrameStack(frames, src.phase_steps, scene, src, noise, seed, sampled=False)

    frames = np.empty((n, m, h, w), dtype=np.int64)
    for i in range(n):
        for j, delta in enumerate(src.phase_steps):
            frames[i, j] = sample_quantum_frame(scene, src, delta,
                                                derive_seed(seed, STREAM_SIGNAL, i, j))
            frames[i, j] += sample_noise_frame(noise, w, h, derive_seed(seed, STREAM_NOISE, i, j))
    return FrameStack(frames, src.phase_steps, scene, src, noise, seed)


def distill(stack: FrameStack, gamma: float | None = None, cut_row: int | None = None,
            visibility_floor: float = DEFAULT_VISIBILITY_FLOOR) -> ExperimentReport:
    """Reconstruct every repeat and aggregate against the ground-truth scene.

    The phase map is the circular mean over repeats; the per-pixel variance
    uses wrapped errors relative to the true phase. RMSE and mean visibility
    are taken over the scene support (NaN when the support is empty). Pixels
    off the support, with zero counts, or below ``visibility_floor`` are
    flagged low-confidence.
    """
    if stack.frames.size == 0 or stack.repeats == 0:
        raise ValueError("empty frame stack")
    scene, src = stack.scene, stack.source
    results = [reconstruct(stack.frames[i], stack.phase_steps, visibility_floor)
               for i in range(stack.repeats)]
    phases = np.stack([r.phase for r in results])
    vis = np.stack([r.visibility for r in results]).mean(axis=0)
    valid = np.logical_and.reduce([r.valid for r in results])

    mean_phase = circular_mean(phases, axis=0)
    errors = wrap_phase_error(phases, scene.phase[None])
    if stack.repeats >= 2:
        phase_var = errors.var(axis=0, ddof=1)
    else:
        phase_var = np.full(scene.shape, np.nan)

    _, noise_var_map = pixel_moments(stack.noise, scene.shape)
    true_vis = scene.magnitude * src.gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        predicted = np.where(
            true_vis > 0,
            (1.0 + noise_var_map / (2.0 * src.s0)) / (src.s0 * stack.m_steps * true_vis**2),
            np.nan,
        )

    support = scene.support_mask
    low_conf = ~valid | (vis < visibility_floor) | ~support
    scored = support & valid
    if np.any(scored):
        err = wrap_phase_error(mean_phase, scene.phase)[scored]
        rmse = float(np.sqrt(np.mean(err**2)))
        mean_vis = float(np.mean(vis[scored]))
        mean_var = float(np.mean(phase_var[scored])) if stack.repeats >= 2 else math.nan
    else:
        rmse = mean_vis = mean_var = math.nan

    h = scene.height
    row = h // 2 if cut_row is None else int(cut_row)
    if h and not (0 <= row < h):
        raise ValueError(f"cut row {row} outside image of height {h}")
    cut = mean_phase[row].copy() if h else np.empty(0)

    amplitude = None
    if gamma is not None:
        if not (0.0 < gamma <= 1.0):
            raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
        amplitude = vis / gamma

    _, noise_var = noise_moments(stack.noise)
    return ExperimentReport(
        results=results,
        mean_phase=mean_phase,
        phase_variance=phase_var,
        predicted_phase_variance=predicted,
        mean_visibility_map=vis,
        phase_rmse=rmse,
        mean_visibility=mean_vis,
        mean_phase_variance=mean_var,
        snr=snr_ratio(scene, src, stack.noise),
        noise_variance=noise_var,
        cut_row=row,
        cut=cut,
        low_confidence=low_conf,
        amplitude=amplitude,
        provenance=stack.provenance,
    )


def signal_trace(scene: SceneObject, pixel: tuple[int, int], src: SourceParams,
                 noise: NoiseModel, repeats: int, seed: int | None = None) -> list[tuple[float, float, float]]:
    """Per-step ``(delta, mean count, std-dev)`` of one pixel over ``repeats`` acquisitions."""
    if repeats < 2:
        raise ValueError("signal trace needs at least 2 repeats")
    row, col = pixel
    if not (0 <= row < scene.height and 0 <= col < scene.width):
        raise ValueError(f"pixel {pixel} outside scene {scene.shape}")
    one = SceneObject(scene.magnitude[row:row + 1, col:col + 1], scene.phase[row:row + 1, col:col + 1],
                      scene.support_mask[row:row + 1, col:col + 1], name=f"{scene.name}[{row},{col}]")
    if noise.spatial_mask is not None:
        noise = replace(noise, spatial_mask=noise.spatial_mask[row:row + 1, col:col + 1])
    stack = run_acquisition(one, replace(src, repeats=repeats), noise, seed)
    counts = stack.frames[:, :, 0, 0].astype(np.float64)
    means = counts.mean(axis=0)
    stds = counts.std(axis=0, ddof=1)
    return [(float(d), float(mu), float(sd)) for d, mu, sd in zip(src.phase_steps, means, stds)]


@dataclass(frozen=True)
class SweepPoint:
    """One row of a resilience or variance sweep."""

    ratio: float
    noise_variance: float
    mean_visibility: float
    phase_rmse: float
    mean_phase_variance: float
    noise_mean: float
    predicted_phase_variance: float
    mode_count: int | None = None
    measured_noise_mean: float | None = None
    measured_noise_variance: float | None = None


def _point(scene, src, report: ExperimentReport, noise: NoiseModel, **extra) -> SweepPoint:
    mu, var = noise_moments(noise)
    v = float(np.mean(scene.magnitude[scene.support_mask])) * src.gamma if scene.support_mask.any() else 0.0
    noise_var = extra.pop("fit_noise_variance", var)
    predicted = predict_phase_variance(src.s0, v, src.m_steps, 1, noise_var) if v > 0 else math.nan
    return SweepPoint(ratio=report.snr, noise_variance=var, mean_visibility=report.mean_visibility,
                      phase_rmse=report.phase_rmse, mean_phase_variance=report.mean_phase_variance,
                      noise_mean=mu, predicted_phase_variance=predicted, **extra)


def resilience_sweep(scene: SceneObject, src: SourceParams, noise: NoiseModel,
                     ratios: Sequence[float], seed: int | None = None,
                     cut_row: int | None = None) -> list[tuple[SweepPoint, ExperimentReport]]:
    """Distill at each noise-to-signal ratio, keeping the noise kind of ``noise``."""
    seed = src.seed if seed is None else int(seed)
    if not ratios:
        raise ValueError("ratio list is empty")
    out = []
    for k, r in enumerate(ratios):
        model = noise.with_mean(noise_mean_for_ratio(src, r)) if noise.kind != "off" else noise
        stack = run_acquisition(scene, src, model, derive_seed(seed, STREAM_SWEEP, k))
        report = distill(stack, cut_row=cut_row)
        out.append((_point(scene, src, report, model), report))
    return out


def variance_sweep(scene: SceneObject, src: SourceParams, noise_variances: Sequence[float],
                   mode_counts: Sequence[int], seed: int | None = None, stats_frames: int = 12,
                   spatial_mask: np.ndarray | None = None
                   ) -> tuple[list[SweepPoint], dict[int, FitResult | None]]:
    """Phase variance against speckle noise variance, one series per mode count.

    Each level's speckle mean is chosen so the closed-form count variance hits
    the requested value. The noise variance used in the fit is measured from
    ``stats_frames`` separate noise-only frames, pooled over the support.
    Zero-variance levels are kept in the rows but left out of the fits.
    """
    seed = src.seed if seed is None else int(seed)
    if not noise_variances or not mode_counts:
        raise ValueError("variance sweep needs non-empty noise variance and mode count lists")
    if src.repeats < 2:
        raise ValueError("variance sweep needs at least 2 repeats per level")
    rows: list[SweepPoint] = []
    fits: dict[int, FitResult | None] = {}
    k = 0
    for modes in mode_counts:
        pts = []
        for target in noise_variances:
            model = NoiseModel.speckle(speckle_mean_for_variance(target, modes), modes, spatial_mask)
            point_seed = derive_seed(seed, STREAM_SWEEP, k)
            stack = run_acquisition(scene, src, model, point_seed)
            report = distill(stack)
            noise_frames = [sample_noise_frame(model, scene.width, scene.height,
                                               derive_seed(point_seed, STREAM_NOISE_STATS, f))
                            for f in range(stats_frames)]
            m_mean, m_var = characterize_noise(noise_frames).pooled(scene.support_mask)
            row = _point(scene, src, report, model, mode_count=modes,
                         measured_noise_mean=m_mean, measured_noise_variance=m_var,
                         fit_noise_variance=m_var)
            rows.append(row)
            if m_var > 0 and row.mean_phase_variance > 0:
                pts.append((m_var, row.mean_phase_variance))
            k += 1
        fits[modes] = loglog_fit(pts) if len(pts) >= 2 else None
    return rows, fits
