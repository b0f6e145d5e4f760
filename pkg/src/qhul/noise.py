"""Classical background noise superimposed on the signal frames.

Every model is an intensity field that is scaled pixel-wise by an optional
spatial mask (the imaged noise object) before sampling. Closed-form moments
are reported for an unmasked pixel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "NOISE_KINDS",
    "NoiseModel",
    "NoiseStats",
    "noise_moments",
    "pixel_moments",
    "sample_noise_frame",
    "characterize_noise",
    "speckle_mean_for_variance",
]

NOISE_KINDS = ("off", "constant", "poisson", "gaussian", "speckle")


@dataclass(frozen=True)
class NoiseModel:
    """Parametric background. ``kind`` is one of :data:`NOISE_KINDS`.

    ``variance`` is only read by the clamped-Gaussian model and ``modes`` (the
    speckle mode count K) only by the speckle model.
    """

    kind: str = "off"
    mean: float = 0.0
    variance: float = 0.0
    modes: int = 1
    spatial_mask: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if not (math.isfinite(self.mean) and self.mean >= 0):
            raise ValueError(f"noise mean must be >= 0, got {self.mean}")
        if not (math.isfinite(self.variance) and self.variance >= 0):
            raise ValueError(f"noise variance must be >= 0, got {self.variance}")
        if int(self.modes) != self.modes or self.modes < 1:
            raise ValueError(f"speckle mode count must be an integer >= 1, got {self.modes}")
        object.__setattr__(self, "modes", int(self.modes))
        if self.spatial_mask is not None:
            mask = np.asarray(self.spatial_mask, dtype=np.float64)
            if mask.ndim != 2:
                raise ValueError("spatial mask must be a 2-D grid")
            if np.any(mask < 0) or not np.all(np.isfinite(mask)):
                raise ValueError("spatial mask must be finite and non-negative")
            object.__setattr__(self, "spatial_mask", mask)

    @classmethod
    def off(cls) -> "NoiseModel":
        return cls("off")

    @classmethod
    def constant(cls, mean: float, spatial_mask=None) -> "NoiseModel":
        return cls("constant", mean=mean, spatial_mask=spatial_mask)

    @classmethod
    def poisson(cls, mean: float, spatial_mask=None) -> "NoiseModel":
        return cls("poisson", mean=mean, spatial_mask=spatial_mask)

    @classmethod
    def gaussian(cls, mean: float, variance: float, spatial_mask=None) -> "NoiseModel":
        return cls("gaussian", mean=mean, variance=variance, spatial_mask=spatial_mask)

    @classmethod
    def speckle(cls, mean: float, modes: int, spatial_mask=None) -> "NoiseModel":
        return cls("speckle", mean=mean, modes=modes, spatial_mask=spatial_mask)

    def with_mean(self, mean: float) -> "NoiseModel":
        return NoiseModel(self.kind, mean, self.variance, self.modes, self.spatial_mask)

    def describe(self) -> str:
        if self.kind == "off":
            return "off"
        if self.kind == "gaussian":
            return f"gaussian(mean={self.mean:.9g},variance={self.variance:.9g})"
        if self.kind == "speckle":
            return f"speckle(mean={self.mean:.9g},modes={self.modes})"
        return f"{self.kind}(mean={self.mean:.9g})"


def noise_moments(model: NoiseModel) -> tuple[float, float]:
    """Closed-form ``(mean, variance)`` of one unmasked pixel.

    Speckle is a gamma-Poisson mixture: intensity ~ Gamma(K, mean/K) then
    Poisson counts, so the variance is ``mean + mean**2 / K``.
    """
    mu = float(model.mean)
    if model.kind == "off":
        return 0.0, 0.0
    if model.kind == "constant":
        return mu, 0.0
    if model.kind == "poisson":
        return mu, mu
    if model.kind == "gaussian":
        return mu, float(model.variance)
    return mu, mu + mu * mu / model.modes


def pixel_moments(model: NoiseModel, shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel closed-form mean and variance grids after masking."""
    scale = _mask(model, shape)
    mu = model.mean * scale
    if model.kind == "off":
        return np.zeros(shape), np.zeros(shape)
    if model.kind == "constant":
        return mu, np.zeros(shape)
    if model.kind == "poisson":
        return mu, mu.copy()
    if model.kind == "gaussian":
        return mu, model.variance * scale**2
    return mu, mu + mu**2 / model.modes


def speckle_mean_for_variance(variance: float, modes: int) -> float:
    """Speckle mean whose count variance ``mu + mu^2/K`` equals ``variance``."""
    if variance < 0:
        raise ValueError("variance must be >= 0")
    # mu = K/2 * (sqrt(1 + 4 var / K) - 1), written to avoid cancellation
    return 2.0 * variance / (1.0 + math.sqrt(1.0 + 4.0 * variance / modes))


def _mask(model: NoiseModel, shape: tuple[int, int]) -> np.ndarray:
    if model.spatial_mask is None:
        return np.ones(shape)
    if model.spatial_mask.shape != tuple(shape):
        raise ValueError(f"noise mask {model.spatial_mask.shape} does not match frame {tuple(shape)}")
    return model.spatial_mask


def sample_noise_frame(model: NoiseModel, width: int, height: int, frame_seed: int) -> np.ndarray:
    """Draw one integer background frame of ``height x width`` pixels."""
    if width < 0 or height < 0:
        raise ValueError("frame dimensions must be non-negative")
    shape = (int(height), int(width))
    if model.kind == "off":
        return np.zeros(shape, dtype=np.int64)
    mu = model.mean * _mask(model, shape)
    rng = np.random.default_rng(frame_seed)
    if model.kind == "constant":
        return np.rint(mu).astype(np.int64)
    if model.kind == "poisson":
        return rng.poisson(mu).astype(np.int64)
    if model.kind == "gaussian":
        if model.variance < 0:
            raise ValueError("gaussian noise variance must be >= 0")
        sd = math.sqrt(model.variance) * _mask(model, shape)
        draw = rng.normal(mu, sd)
        return np.rint(np.clip(draw, 0.0, None)).astype(np.int64)
    intensity = rng.gamma(model.modes, mu / model.modes)
    return rng.poisson(intensity).astype(np.int64)


@dataclass(frozen=True)
class NoiseStats:
    """Per-pixel sample moments of a stack of noise frames."""

    mean: np.ndarray
    variance: np.ndarray
    n_frames: int

    @property
    def points(self) -> np.ndarray:
        """``(n_pixels, 2)`` array of per-pixel (mean, variance) scatter points."""
        return np.column_stack([self.mean.ravel(), self.variance.ravel()])

    def pooled(self, mask: np.ndarray | None = None) -> tuple[float, float]:
        """Average per-pixel mean and variance, optionally over ``mask`` only."""
        if mask is None:
            m, v = self.mean, self.variance
        else:
            m, v = self.mean[mask], self.variance[mask]
        if m.size == 0:
            return 0.0, 0.0
        return float(np.mean(m)), float(np.mean(v))


def characterize_noise(frames: Sequence[np.ndarray]) -> NoiseStats:
    """Unbiased per-pixel mean and variance across ``frames`` (at least two)."""
    if len(frames) < 2:
        raise ValueError(f"need at least 2 frames to estimate a variance, got {len(frames)}")
    shapes = {np.shape(f) for f in frames}
    if len(shapes) != 1:
        raise ValueError(f"frames differ in dimensions: {sorted(shapes)}")
    stack = np.stack([np.asarray(f, dtype=np.float64) for f in frames])
    return NoiseStats(mean=stack.mean(axis=0), variance=stack.var(axis=0, ddof=1),
                      n_frames=len(frames))
