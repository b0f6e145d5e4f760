"""Simulation and distillation of quantum holography with undetected light.

Synthetic signal-photon frame stacks are generated from the interferometric
count-rate model, classical background noise is superimposed, and the object
phase/visibility is recovered by M-step phase-shifting reconstruction.
"""

__version__ = "0.1.0"

from qhul.model import (
    SceneObject,
    SetupParams,
    SourceParams,
    derive_seed,
    derive_source_params,
    expected_counts,
    expected_frame,
    sample_quantum_frame,
)
from qhul.noise import NoiseModel, NoiseStats, characterize_noise, noise_moments, sample_noise_frame
from qhul.holography import (
    ReconstructionResult,
    predict_phase_variance,
    reconstruct,
    wrap_phase_error,
)
from qhul.pipeline import (
    ExperimentReport,
    FrameStack,
    distill,
    run_acquisition,
    signal_trace,
    snr_ratio,
)
from qhul.stats import FitResult, loglog_fit, poisson_check

__all__ = [
    "__version__",
    "SceneObject",
    "SetupParams",
    "SourceParams",
    "derive_seed",
    "derive_source_params",
    "expected_counts",
    "expected_frame",
    "sample_quantum_frame",
    "NoiseModel",
    "NoiseStats",
    "characterize_noise",
    "noise_moments",
    "sample_noise_frame",
    "ReconstructionResult",
    "predict_phase_variance",
    "reconstruct",
    "wrap_phase_error",
    "ExperimentReport",
    "FrameStack",
    "distill",
    "run_acquisition",
    "signal_trace",
    "snr_ratio",
    "FitResult",
    "loglog_fit",
    "poisson_check",
]
