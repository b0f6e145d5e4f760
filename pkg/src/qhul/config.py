"""Experiment configuration: an INI-style ``key = value`` file with sections.

Example::

    [scene]
    glyph = iof
    width = 64
    height = 64

    [source]
    s0 = 134
    gamma = 1
    steps = 12
    repeats = 1

    [noise]
    kind = poisson
    mean = 0

    [sweep]
    ratios = 8, 37, 50, 104, 252

    [run]
    seed = 1

``seed`` is mandatory. Relative file paths are resolved against the
directory holding the config file.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from qhul.imageio import read_pfm, read_pgm
from qhul.model import SceneObject, SourceParams, default_phase_steps
from qhul.noise import NOISE_KINDS, NoiseModel
from qhul.scenes import load_scene

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "load_config"]


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(",", " ").split())


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_list(values) -> str:
    return ", ".join(_fmt(v) if isinstance(v, float) else str(v) for v in values)


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    # scene
    glyph: str | None = "iof"
    magnitude_path: str | None = None
    phase_path: str | None = None
    width: int = 64
    height: int = 64
    # source
    s0: float = 134.0
    gamma: float = 1.0
    steps: int = 12
    phase_steps: tuple[float, ...] | None = None
    repeats: int = 1
    # noise
    noise_kind: str = "poisson"
    noise_mean: float = 0.0
    noise_variance: float = 0.0
    noise_modes: int = 1
    noise_mask_path: str | None = None
    # sweeps
    ratios: tuple[float, ...] = (8.0, 37.0, 50.0, 104.0, 252.0)
    noise_variances: tuple[float, ...] = (800.0, 1550.0, 3000.0, 5800.0, 11200.0, 21600.0,
                                          41700.0, 80400.0)
    mode_counts: tuple[int, ...] = (1, 2, 4, 8)
    stats_frames: int = 12
    # run
    output_dir: str = "out"
    cut_row: int | None = None
    visibility_floor: float = 0.01
    trace_row: int | None = None
    trace_col: int | None = None
    base_dir: str = field(default=".", compare=False)

    def __post_init__(self):
        if self.glyph is None and (self.magnitude_path is None or self.phase_path is None):
            raise ConfigError("scene needs either a glyph or both magnitude and phase paths")
        if self.glyph is not None and (self.magnitude_path or self.phase_path):
            raise ConfigError("scene takes a glyph or image paths, not both")
        if self.width < 1 or self.height < 1:
            raise ConfigError("scene width and height must be positive")
        if self.noise_kind not in NOISE_KINDS:
            raise ConfigError(f"unknown noise kind {self.noise_kind!r}")
        for name in ("ratios", "noise_variances", "mode_counts"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"sweep list {name} is empty")
        if any(r < 0 for r in self.ratios):
            raise ConfigError("ratios must be >= 0")
        if any(v < 0 for v in self.noise_variances):
            raise ConfigError("noise variances must be >= 0")
        if any(k < 1 for k in self.mode_counts):
            raise ConfigError("mode counts must be >= 1")
        if self.stats_frames < 2:
            raise ConfigError("stats_frames must be >= 2")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        try:
            self.source()
            self.noise_template()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # -- domain objects ---------------------------------------------------

    def _resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def scene(self) -> SceneObject:
        try:
            if self.glyph is not None:
                return load_scene(self.glyph, self.width, self.height)
            return load_scene((self._resolve(self.magnitude_path), self._resolve(self.phase_path)))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load scene: {exc}") from exc

    def source(self) -> SourceParams:
        steps = self.phase_steps if self.phase_steps is not None else default_phase_steps(self.steps)
        return SourceParams(s0=self.s0, gamma=self.gamma, phase_steps=steps,
                            repeats=self.repeats, seed=self.seed)

    def noise_mask(self) -> np.ndarray | None:
        if self.noise_mask_path is None:
            return None
        path = self._resolve(self.noise_mask_path)
        try:
            with open(path, "rb") as f:
                magic = f.read(2)
            if magic == b"Pf":
                return read_pfm(path).astype(np.float64)
            img, maxval = read_pgm(path)
            return img / maxval
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load noise mask: {exc}") from exc

    def noise_template(self, mask: np.ndarray | None = None) -> NoiseModel:
        return NoiseModel(self.noise_kind, self.noise_mean, self.noise_variance, self.noise_modes,
                          mask)

    def noise(self) -> NoiseModel:
        return self.noise_template(self.noise_mask())

    # -- serialization ----------------------------------------------------

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        scene = {}
        if self.glyph is not None:
            scene["glyph"] = self.glyph
        else:
            scene["magnitude"] = self.magnitude_path
            scene["phase"] = self.phase_path
        scene["width"] = str(self.width)
        scene["height"] = str(self.height)
        cp["scene"] = scene
        source = {"s0": _fmt(self.s0), "gamma": _fmt(self.gamma), "steps": str(self.steps),
                  "repeats": str(self.repeats)}
        if self.phase_steps is not None:
            source["phase_steps"] = _fmt_list(self.phase_steps)
        cp["source"] = source
        noise = {"kind": self.noise_kind, "mean": _fmt(self.noise_mean),
                 "variance": _fmt(self.noise_variance), "modes": str(self.noise_modes)}
        if self.noise_mask_path is not None:
            noise["mask"] = self.noise_mask_path
        cp["noise"] = noise
        cp["sweep"] = {"ratios": _fmt_list(self.ratios),
                       "noise_variances": _fmt_list(self.noise_variances),
                       "mode_counts": _fmt_list(self.mode_counts),
                       "stats_frames": str(self.stats_frames)}
        run = {"seed": str(self.seed), "output": self.output_dir,
               "visibility_floor": _fmt(self.visibility_floor)}
        if self.cut_row is not None:
            run["cut_row"] = str(self.cut_row)
        if self.trace_row is not None:
            run["trace_row"] = str(self.trace_row)
        if self.trace_col is not None:
            run["trace_col"] = str(self.trace_col)
        cp["run"] = run
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue().replace("\r\n", "\n")

    def config_hash(self) -> str:
        """Digest of every setting that affects results (the output directory does not)."""
        text = replace(self, output_dir="").to_text()
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


_KNOWN = {
    "scene": {"glyph", "magnitude", "phase", "width", "height"},
    "source": {"s0", "gamma", "steps", "phase_steps", "repeats"},
    "noise": {"kind", "mean", "variance", "modes", "mask"},
    "sweep": {"ratios", "noise_variances", "mode_counts", "stats_frames"},
    "run": {"seed", "output", "cut_row", "visibility_floor", "trace_row", "trace_col"},
}


def parse_config(text: str, base_dir: str | Path = ".") -> ExperimentConfig:
    """Parse config text; raises :class:`ConfigError` on any problem."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    for section in cp.sections():
        if section not in _KNOWN:
            raise ConfigError(f"unknown section [{section}]")
        unknown = set(cp[section]) - _KNOWN[section]
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {', '.join(sorted(unknown))}")
    if not cp.has_option("run", "seed"):
        raise ConfigError("[run] seed is mandatory")

    def get(section, key, conv, default=None):
        if not cp.has_option(section, key):
            return default
        raw = cp.get(section, key).strip()
        try:
            return conv(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc

    defaults = {f.name: f.default for f in fields(ExperimentConfig) if f.name != "seed"}
    kw = dict(
        seed=get("run", "seed", int),
        magnitude_path=get("scene", "magnitude", str),
        phase_path=get("scene", "phase", str),
        width=get("scene", "width", int, defaults["width"]),
        height=get("scene", "height", int, defaults["height"]),
        s0=get("source", "s0", float, defaults["s0"]),
        gamma=get("source", "gamma", float, defaults["gamma"]),
        steps=get("source", "steps", int, defaults["steps"]),
        phase_steps=get("source", "phase_steps", _floats),
        repeats=get("source", "repeats", int, defaults["repeats"]),
        noise_kind=get("noise", "kind", str, defaults["noise_kind"]),
        noise_mean=get("noise", "mean", float, defaults["noise_mean"]),
        noise_variance=get("noise", "variance", float, defaults["noise_variance"]),
        noise_modes=get("noise", "modes", int, defaults["noise_modes"]),
        noise_mask_path=get("noise", "mask", str),
        ratios=get("sweep", "ratios", _floats, defaults["ratios"]),
        noise_variances=get("sweep", "noise_variances", _floats, defaults["noise_variances"]),
        mode_counts=get("sweep", "mode_counts", _ints, defaults["mode_counts"]),
        stats_frames=get("sweep", "stats_frames", int, defaults["stats_frames"]),
        output_dir=get("run", "output", str, defaults["output_dir"]),
        cut_row=get("run", "cut_row", int),
        visibility_floor=get("run", "visibility_floor", float, defaults["visibility_floor"]),
        trace_row=get("run", "trace_row", int),
        trace_col=get("run", "trace_col", int),
        base_dir=str(base_dir),
    )
    if kw["magnitude_path"] is None and kw["phase_path"] is None:
        kw["glyph"] = get("scene", "glyph", str, defaults["glyph"])
    else:
        kw["glyph"] = get("scene", "glyph", str)
    if kw["phase_steps"] is not None and cp.has_option("source", "steps") \
            and len(kw["phase_steps"]) != kw["steps"]:
        raise ConfigError("[source] steps disagrees with the length of phase_steps")
    if kw["phase_steps"] is not None:
        kw["steps"] = len(kw["phase_steps"])
    if not all(math.isfinite(v) for v in (kw["s0"], kw["gamma"], kw["noise_mean"])):
        raise ConfigError("numeric config values must be finite")
    return ExperimentConfig(**kw)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=path.parent)
