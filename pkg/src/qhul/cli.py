"""Command-line entry point.

    qhul predict --s0 134 --visibility 0.5 --steps 12 --repeats 1 --noise-var 0
    qhul resilience-sweep --config sweep.ini [--seed N] [--out DIR]
    qhul variance-sweep --config sweep.ini
    qhul characterize-noise --config sweep.ini
    qhul signal-trace --config sweep.ini
"""

from __future__ import annotations

import argparse
import hashlib
import sys

import numpy as np

from qhul import __version__
from qhul.config import ConfigError, ExperimentConfig, load_config
from qhul.holography import predict_phase_variance
from qhul.model import derive_seed
from qhul.noise import NoiseModel, characterize_noise, noise_moments, sample_noise_frame
from qhul.pipeline import noise_mean_for_ratio, resilience_sweep, signal_trace, variance_sweep
from qhul.report import OutputDir, fmt, provenance_line
from qhul.stats import poisson_check

COMMANDS = ("characterize-noise", "resilience-sweep", "variance-sweep", "predict", "signal-trace")


def format_short(x: float, digits: int = 5) -> str:
    """Compact scientific form such as ``2.4876e-3``."""
    mantissa, exp = f"{x:.{digits - 1}e}".split("e")
    return f"{mantissa}e{int(exp)}"


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="experiment config file (INI key=value sections)")
    p.add_argument("--seed", type=int, help="override [run] seed")
    p.add_argument("--out", help="override [run] output directory")
    p.add_argument("--repeats", type=int, help="override [source] repeats")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qhul",
        description="Simulate and distill phase-shifting holography with undetected light "
                    "under classical background noise.",
    )
    parser.add_argument("--version", action="version", version=f"qhul {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("predict", help="closed-form phase-estimate variance (rad^2)")
    p.add_argument("--s0", type=float, required=True, help="single-pass signal photons per pixel")
    p.add_argument("--visibility", type=float, required=True, help="fringe visibility |R|*gamma in (0, 1]")
    p.add_argument("--steps", type=int, required=True, help="number of phase steps M (>= 3)")
    p.add_argument("--repeats", type=int, default=1, help="number of acquisitions n (default 1)")
    p.add_argument("--noise-var", type=float, default=0.0, help="background count variance")
    p.add_argument("--out", help="also write predict.csv into this directory")

    p = sub.add_parser("characterize-noise",
                       help="per-pixel and pooled noise moments with a Poissonianity check")
    _add_config_args(p)
    p = sub.add_parser("resilience-sweep",
                       help="distill the scene at each noise-to-signal ratio in [sweep] ratios")
    _add_config_args(p)
    p = sub.add_parser("variance-sweep",
                       help="phase variance vs speckle noise variance with log-log fits")
    _add_config_args(p)
    p = sub.add_parser("signal-trace",
                       help="per-step mean and std-dev of one pixel for each ratio")
    _add_config_args(p)
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, output_dir=args.out, repeats=args.repeats)


def _outdir(cfg: ExperimentConfig, command: str, **extra) -> OutputDir:
    return OutputDir(cfg.output_dir, provenance_line(command, cfg.config_hash(), cfg.seed, **extra))


def cmd_predict(args) -> int:
    value = predict_phase_variance(args.s0, args.visibility, args.steps, args.repeats, args.noise_var)
    print(format_short(value))
    if args.out:
        flags = f"s0={args.s0!r} visibility={args.visibility!r} steps={args.steps} " \
                f"repeats={args.repeats} noise_var={args.noise_var!r}"
        digest = hashlib.sha256(flags.encode()).hexdigest()[:16]
        out = OutputDir(args.out, provenance_line("predict", digest, 0))
        out.csv("predict.csv", ("s0", "visibility", "steps", "repeats", "noise_variance",
                                "phase_variance"),
                [(args.s0, args.visibility, args.steps, args.repeats, args.noise_var, value)])
    return 0


def cmd_characterize(cfg: ExperimentConfig) -> int:
    out = _outdir(cfg, "characterize-noise", frames=cfg.stats_frames)
    scene = cfg.scene()
    mask = cfg.noise_mask()
    w, h = scene.width, scene.height

    def measure(model: NoiseModel, key: int):
        frames = [sample_noise_frame(model, w, h, derive_seed(cfg.seed, 3, key, f))
                  for f in range(cfg.stats_frames)]
        return characterize_noise(frames)

    configured = cfg.noise_template(mask)
    out.noise_stats("noise_pixels.csv", measure(configured, 0))

    src = cfg.source()
    models = [configured]
    for r in cfg.ratios:
        mu = noise_mean_for_ratio(src, r)
        models.append(NoiseModel.poisson(mu, mask))
        models.extend(NoiseModel.speckle(mu, k, mask) for k in cfg.mode_counts)
    rows = []
    labelled = []
    for key, model in enumerate(models):
        stats = measure(model, key)
        mean, var = stats.pooled()
        nominal = noise_moments(model)
        check = poisson_check([(mean, var)])[0]
        rows.append([model.describe(), model.kind, model.modes, nominal[0], nominal[1],
                     mean, var, check.ratio, check.label])
        labelled.append((model.describe(), check))
    out.csv("noise_pooled.csv", ("configuration", "kind", "modes", "nominal_mean",
                                 "nominal_variance", "mean", "variance", "variance_over_mean",
                                 "class"), rows)
    out.poisson_table("poisson_check.csv", labelled)
    for row in rows:
        print(f"{row[0]:<40} mean={fmt(row[5]):>12} var={fmt(row[6]):>12} class={row[8]}")
    return 0


def cmd_resilience(cfg: ExperimentConfig) -> int:
    src = cfg.source()
    out = _outdir(cfg, "resilience-sweep", repeats=src.repeats, steps=src.m_steps)
    scene = cfg.scene()
    results = resilience_sweep(scene, src, cfg.noise(), cfg.ratios, cfg.seed, cfg.cut_row)
    out.sweep("resilience.csv", [p for p, _ in results])
    for k, (point, report) in enumerate(results):
        tag = f"point{k:02d}"
        out.cut(f"{tag}_cut.csv", report)
        out.maps(tag, report)
        print(f"r={fmt(point.ratio):>8}  phase_rmse={fmt(point.phase_rmse):>12}  "
              f"mean_visibility={fmt(point.mean_visibility)}")
    out.manifest()
    return 0


def cmd_variance(cfg: ExperimentConfig) -> int:
    src = cfg.source()
    if src.repeats < 2:
        raise ConfigError("variance-sweep needs [source] repeats >= 2")
    out = _outdir(cfg, "variance-sweep", repeats=src.repeats, steps=src.m_steps)
    rows, fits = variance_sweep(cfg.scene(), src, cfg.noise_variances, cfg.mode_counts, cfg.seed,
                                cfg.stats_frames, cfg.noise_mask())
    out.sweep("variance_sweep.csv", rows, variance_sweep=True)
    out.fits("fits.csv", fits)
    lines = []
    for modes, fit in fits.items():
        line = f"mode_count={modes} " + (fit.summary() if fit else "insufficient points")
        lines.append(line)
        print(line)
    baseline = [r for r in rows if r.noise_variance == 0]
    for r in baseline:
        lines.append(f"baseline mode_count={r.mode_count} phase_variance={fmt(r.mean_phase_variance)}")
    out.text("fit_summary.txt", "\n".join(lines))
    return 0


def cmd_trace(cfg: ExperimentConfig) -> int:
    src = cfg.source()
    if src.repeats < 2:
        raise ConfigError("signal-trace needs [source] repeats >= 2")
    scene = cfg.scene()
    row = scene.height // 2 if cfg.trace_row is None else cfg.trace_row
    col = scene.width // 2 if cfg.trace_col is None else cfg.trace_col
    out = _outdir(cfg, "signal-trace", repeats=src.repeats, pixel=f"{row}:{col}")
    noise = cfg.noise()
    table = []
    for k, r in enumerate(cfg.ratios):
        model = noise.with_mean(noise_mean_for_ratio(src, r)) if noise.kind != "off" else noise
        for delta, mean, sd in signal_trace(scene, (row, col), src, model, src.repeats,
                                            derive_seed(cfg.seed, 2, k)):
            table.append((r, delta, mean, sd))
    out.csv("signal_trace.csv", ("r", "delta", "mean", "std"), table)
    for r in cfg.ratios:
        sds = [t[3] for t in table if t[0] == r]
        print(f"r={fmt(r):>8}  mean std-dev={fmt(float(np.mean(sds)))}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "predict":
            return cmd_predict(args)
        cfg = _load(args)
        handler = {
            "characterize-noise": cmd_characterize,
            "resilience-sweep": cmd_resilience,
            "variance-sweep": cmd_variance,
            "signal-trace": cmd_trace,
        }[args.command]
        return handler(cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"qhul {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
