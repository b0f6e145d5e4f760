"""Signal-arm count model: scene, source parameters and frame sampling.

The mean number of signal photons detected at a pixel for interferometric
phase ``delta`` is::

    <N_S> = 2 * s0 * (1 + |R| * gamma * cos(delta + phi_R))

and individual frames are independent per-pixel Poisson draws around it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "SceneObject",
    "SourceParams",
    "SetupParams",
    "default_phase_steps",
    "derive_seed",
    "expected_counts",
    "expected_frame",
    "sample_quantum_frame",
    "derive_source_params",
]

SPEED_OF_LIGHT = 2.997_924_58e8  # m/s


def default_phase_steps(m_steps: int) -> tuple[float, ...]:
    """Equally spaced phase steps ``j * 2*pi / M`` for ``j = 0..M-1``."""
    if m_steps < 3:
        raise ValueError(f"need at least 3 phase steps, got {m_steps}")
    return tuple(2.0 * math.pi * j / m_steps for j in range(m_steps))


def derive_seed(base_seed: int, *key: int) -> int:
    """Counter-based 64-bit seed for the stream addressed by ``key``.

    The result depends only on ``base_seed`` and ``key``, never on the order in
    which streams are requested, so frames may be sampled in any order or in
    parallel.
    """
    seq = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in key))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SceneObject:
    """Per-pixel complex reflectance ``R = |R| exp(i phi_R)`` of the imaged object."""

    magnitude: np.ndarray
    phase: np.ndarray
    support_mask: np.ndarray = None  # type: ignore[assignment]
    name: str = "scene"

    def __post_init__(self):
        mag = np.asarray(self.magnitude, dtype=np.float64)
        ph = np.asarray(self.phase, dtype=np.float64)
        if mag.ndim != 2 or ph.ndim != 2:
            raise ValueError("magnitude and phase must be 2-D grids")
        if mag.shape != ph.shape:
            raise ValueError(f"magnitude {mag.shape} and phase {ph.shape} dimensions differ")
        if not (np.all(np.isfinite(mag)) and np.all(np.isfinite(ph))):
            raise ValueError("scene grids must be finite")
        if np.any(mag < 0.0) or np.any(mag > 1.0):
            raise ValueError("|R| must lie in [0, 1]")
        if np.any(ph <= -math.pi) or np.any(ph > math.pi):
            raise ValueError("phase must lie in (-pi, pi]")
        if self.support_mask is None:
            support = mag > 0.0
        else:
            support = np.asarray(self.support_mask, dtype=bool)
            if support.shape != mag.shape:
                raise ValueError(f"support mask {support.shape} does not match scene {mag.shape}")
        object.__setattr__(self, "magnitude", mag)
        object.__setattr__(self, "phase", ph)
        object.__setattr__(self, "support_mask", support)

    @property
    def height(self) -> int:
        return self.magnitude.shape[0]

    @property
    def width(self) -> int:
        return self.magnitude.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.magnitude.shape

    @classmethod
    def uniform(cls, width: int, height: int, magnitude: float = 1.0, phase: float = 0.0,
                name: str = "uniform") -> "SceneObject":
        return cls(np.full((height, width), magnitude), np.full((height, width), phase), name=name)


@dataclass(frozen=True)
class SourceParams:
    """Photon-pair source and acquisition settings.

    ``s0`` is the single-pass signal photon number per pixel per frame; any
    beam-splitter loss on the detection path is assumed folded into it.
    """

    s0: float
    gamma: float = 1.0
    phase_steps: tuple[float, ...] = field(default_factory=lambda: default_phase_steps(12))
    repeats: int = 1
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.s0) and self.s0 > 0):
            raise ValueError(f"s0 must be positive, got {self.s0}")
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        steps = tuple(float(d) for d in self.phase_steps)
        if len(steps) < 3:
            raise ValueError("need at least 3 phase steps")
        if not all(math.isfinite(d) for d in steps):
            raise ValueError("phase steps must be finite")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "phase_steps", steps)

    @property
    def m_steps(self) -> int:
        return len(self.phase_steps)

    @classmethod
    def with_steps(cls, s0: float, gamma: float = 1.0, m_steps: int = 12, repeats: int = 1,
                   seed: int = 0) -> "SourceParams":
        return cls(s0=s0, gamma=gamma, phase_steps=default_phase_steps(m_steps),
                   repeats=repeats, seed=seed)


@dataclass(frozen=True)
class SetupParams:
    """Physical parameters of the nonlinear interferometer and detection."""

    pump_area: float  # m^2
    pixel_area: float  # m^2
    detection_time: float  # s
    signal_wavelength: float  # m
    focal_length: float  # m
    bandwidth: float  # rad/s
    group_delay_mismatch: float  # s, D*L + (L_s - L_i)/c
    gain: float  # sigma * L

    def __post_init__(self):
        positive = {
            "pump_area": self.pump_area,
            "pixel_area": self.pixel_area,
            "detection_time": self.detection_time,
            "signal_wavelength": self.signal_wavelength,
            "focal_length": self.focal_length,
            "gain": self.gain,
        }
        for name, value in positive.items():
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        if not (math.isfinite(self.bandwidth) and self.bandwidth >= 0):
            raise ValueError(f"bandwidth must be >= 0, got {self.bandwidth}")
        if not math.isfinite(self.group_delay_mismatch):
            raise ValueError("group_delay_mismatch must be finite")


def derive_source_params(setup: SetupParams) -> tuple[float, float]:
    """Closed-form ``(s0, gamma)`` for a Gaussian phase-matching spectrum.

    s0 = S_P S_D / (lambda_S f)^2 * T_D B / (2 pi) * (sigma L)^2
    gamma = exp(-B^2 / (4 pi) * tau^2), tau the group-delay mismatch.
    """
    s = setup
    s0 = (s.pump_area * s.pixel_area / (s.signal_wavelength * s.focal_length) ** 2
          * s.detection_time * s.bandwidth / (2.0 * math.pi) * s.gain**2)
    gamma = math.exp(-(s.bandwidth**2) / (4.0 * math.pi) * s.group_delay_mismatch**2)
    return s0, gamma


def expected_counts(src: SourceParams, magnitude, phase, delta):
    """Mean signal counts ``2 s0 [1 + |R| gamma cos(delta + phi_R)]``.

    Accepts scalars or broadcastable arrays; returns the same kind.
    """
    mag = np.asarray(magnitude, dtype=np.float64)
    ph = np.asarray(phase, dtype=np.float64)
    d = np.asarray(delta, dtype=np.float64)
    if not (np.all(np.isfinite(mag)) and np.all(np.isfinite(ph)) and np.all(np.isfinite(d))):
        raise ValueError("expected_counts inputs must be finite")
    if np.any(mag < 0.0) or np.any(mag > 1.0):
        raise ValueError("|R| must lie in [0, 1]")
    out = 2.0 * src.s0 * (1.0 + mag * src.gamma * np.cos(d + ph))
    if out.ndim == 0:
        return float(out)
    return out


def expected_frame(scene: SceneObject, src: SourceParams, delta: float) -> np.ndarray:
    """Noiseless expected-count image for one phase step."""
    return expected_counts(src, scene.magnitude, scene.phase, np.full(scene.shape, float(delta)))


def sample_quantum_frame(scene: SceneObject, src: SourceParams, delta: float,
                         frame_seed: int) -> np.ndarray:
    """One camera frame of signal photons: independent Poisson counts per pixel."""
    mean = expected_frame(scene, src, delta)
    rng = np.random.default_rng(frame_seed)
    return rng.poisson(mean).astype(np.int64)


def phase_steps_distinct(steps: Sequence[float], tol: float = 1e-9) -> bool:
    """True when no two steps coincide modulo 2*pi."""
    wrapped = [math.remainder(d, 2.0 * math.pi) for d in steps]
    for i in range(len(wrapped)):
        for j in range(i + 1, len(wrapped)):
            if abs(math.remainder(wrapped[i] - wrapped[j], 2.0 * math.pi)) < tol:
                return False
    return True
