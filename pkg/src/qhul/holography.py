"""M-step phase-shifting reconstruction and its phase-variance predictor."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from qhul.model import phase_steps_distinct

__all__ = [
    "ReconstructionResult",
    "reconstruct",
    "predict_phase_variance",
    "wrap_phase",
    "wrap_phase_error",
    "circular_mean",
    "DEFAULT_VISIBILITY_FLOOR",
]

DEFAULT_VISIBILITY_FLOOR = 0.01


def wrap_phase(angle):
    """Map angles onto (-pi, pi]."""
    a = np.asarray(angle, dtype=np.float64)
    out = math.pi - np.mod(math.pi - a, 2.0 * math.pi)
    if out.ndim == 0:
        return float(out)
    return out


def wrap_phase_error(estimate, truth):
    """Signed minimal-arc difference ``estimate - truth`` in (-pi, pi]."""
    est = np.asarray(estimate, dtype=np.float64)
    tru = np.asarray(truth, dtype=np.float64)
    if not (np.all(np.isfinite(est)) and np.all(np.isfinite(tru))):
        raise ValueError("phase inputs must be finite")
    return wrap_phase(est - tru)


def circular_mean(phases: np.ndarray, axis: int = 0) -> np.ndarray:
    """Direction of the mean resultant vector along ``axis``, in (-pi, pi]."""
    z = np.exp(1j * np.asarray(phases, dtype=np.float64)).mean(axis=axis)
    return wrap_phase(np.arctan2(z.imag, z.real))


@dataclass(frozen=True)
class ReconstructionResult:
    """Per-pixel output of one phase-shifting reconstruction.

    ``visibility`` is the fringe contrast ``|R| * gamma``; it is not clipped,
    so values above one indicate sampling noise. ``background`` is the mean
    count per frame. Pixels with zero total counts are marked invalid and
    carry phase 0.
    """

    visibility: np.ndarray
    phase: np.ndarray
    background: np.ndarray
    m_steps: int
    valid: np.ndarray
    visibility_floor: float = DEFAULT_VISIBILITY_FLOOR
    predicted_phase_variance: np.ndarray | None = None

    @property
    def low_confidence(self) -> np.ndarray:
        return ~self.valid | (self.visibility < self.visibility_floor)

    @property
    def over_unity(self) -> np.ndarray:
        return self.visibility > 1.0

    def magnitude(self, gamma: float) -> np.ndarray:
        """Object reflectance ``|R| = V / gamma``; needs the coherence factor."""
        if not (0.0 < gamma <= 1.0):
            raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
        return self.visibility / gamma


def _as_stack(frames) -> np.ndarray:
    if isinstance(frames, np.ndarray):
        stack = frames.astype(np.float64, copy=False)
    else:
        shapes = {np.shape(f) for f in frames}
        if len(shapes) > 1:
            raise ValueError(f"frames differ in dimensions: {sorted(shapes)}")
        stack = np.stack([np.asarray(f, dtype=np.float64) for f in frames])
    return stack


def reconstruct(frames, phase_steps: Sequence[float],
                visibility_floor: float = DEFAULT_VISIBILITY_FLOOR) -> ReconstructionResult:
    """Recover phase and visibility from ``M`` phase-stepped frames.

    With ``C = sum N_j cos d_j``, ``S = sum N_j sin d_j`` and ``T = sum N_j``
    the estimates are ``phase = atan2(-S, C)`` and ``V = 2 sqrt(S^2 + C^2) / T``.
    For four steps at (0, pi/2, pi, 3pi/2) this is the classic four-bucket
    formula. ``frames`` may be a sequence of 2-D images or an array whose
    first axis runs over the steps (extra leading axes are not allowed).
    """
    steps = np.asarray(phase_steps, dtype=np.float64)
    m = steps.size
    if m < 3:
        raise ValueError(f"need at least 3 phase steps, got {m}")
    stack = _as_stack(frames)
    if stack.shape[0] != m:
        raise ValueError(f"got {stack.shape[0]} frames for {m} phase steps")
    if not phase_steps_distinct(steps.tolist()):
        raise ValueError("phase steps must be distinct modulo 2*pi")

    cos_d, sin_d = np.cos(steps), np.sin(steps)
    t = stack.sum(axis=0)
    if abs(cos_d.sum()) < 1e-9 and abs(sin_d.sum()) < 1e-9:
        # balanced steps: removing the mean count first is exact and avoids
        # cancellation against the background when the fringe is faint
        stack = stack - t / m
    c = np.tensordot(cos_d, stack, axes=(0, 0))
    s = np.tensordot(sin_d, stack, axes=(0, 0))

    valid = t > 0
    phase = np.where(valid, wrap_phase(np.arctan2(-s, c)), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        vis = np.where(valid, 2.0 * np.hypot(s, c) / np.where(valid, t, 1.0), 0.0)
    return ReconstructionResult(
        visibility=vis,
        phase=phase,
        background=t / m,
        m_steps=m,
        valid=valid,
        visibility_floor=visibility_floor,
    )


def predict_phase_variance(s0: float, visibility: float, m_steps: int, repeats: int,
                           noise_variance: float) -> float:
    """Phase-estimate variance (rad^2) from first-order error propagation.

    ``1 / (n s0 M V^2) * (1 + noise_variance / (2 s0))``. Accurate while the
    result is small; at very low counts the arctan estimator's variance is
    larger than this.
    """
    if not s0 > 0:
        raise ValueError(f"s0 must be positive, got {s0}")
    if not (0.0 < visibility <= 1.0):
        raise ValueError(f"visibility must lie in (0, 1], got {visibility}")
    if m_steps < 3:
        raise ValueError(f"need at least 3 phase steps, got {m_steps}")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if noise_variance < 0:
        raise ValueError("noise variance must be >= 0")
    return (1.0 + noise_variance / (2.0 * s0)) / (repeats * s0 * m_steps * visibility**2)
