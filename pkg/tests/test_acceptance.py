"""Acceptance checks, one printed PASS/FAIL line per criterion.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from qhul.cli import main
from qhul.config import load_config
from qhul.holography import predict_phase_variance, reconstruct, wrap_phase_error
from qhul.model import SceneObject, SourceParams, default_phase_steps, sample_quantum_frame
from qhul.noise import NoiseModel, noise_moments, sample_noise_frame
from qhul.pipeline import resilience_sweep, run_acquisition, variance_sweep
from qhul.scenes import glyph_scene
from qhul.stats import poisson_check

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def verdict(number, ok, detail):
    print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_criterion_1_exact_noiseless_recovery():
    rng = np.random.default_rng(1001)
    start = time.perf_counter()
    worst_phase = worst_vis = 0.0
    for _ in range(1000):
        m = int(rng.choice([3, 4, 5, 12]))
        mag, gamma = rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)
        phase = rng.uniform(-math.pi, math.pi)
        scene = SceneObject.uniform(1, 1, magnitude=mag, phase=phase)
        src = SourceParams.with_steps(rng.uniform(1, 1000), gamma=gamma, m_steps=m)
        stack = run_acquisition(scene, src, NoiseModel.off(), sample=False)
        res = reconstruct(stack.frames[0], src.phase_steps)
        worst_phase = max(worst_phase, abs(wrap_phase_error(res.phase[0, 0], phase)))
        worst_vis = max(worst_vis, abs(res.visibility[0, 0] - mag * gamma))
    elapsed = time.perf_counter() - start
    ok = worst_phase < 1e-12 and worst_vis < 1e-12 and elapsed < 5
    verdict(1, ok, f"max phase err {worst_phase:.2e}, max V err {worst_vis:.2e}, {elapsed:.2f} s")


def test_criterion_2_quantum_frames_are_poissonian():
    start = time.perf_counter()
    scene = SceneObject.uniform(100, 100, magnitude=0.0)
    src = SourceParams.with_steps(134)
    frames = [sample_quantum_frame(scene, src, 0.0, seed) for seed in range(10)]
    data = np.concatenate([f.ravel() for f in frames]).astype(float)
    ratio = data.var(ddof=1) / data.mean()
    elapsed = time.perf_counter() - start
    ok = data.size == 100_000 and 0.95 <= ratio <= 1.05 and elapsed < 10
    verdict(2, ok, f"mean {data.mean():.2f}, variance/mean {ratio:.4f}, {elapsed:.2f} s")


def _cell_variance(s0, v, m, noise_var, seed):
    # 2000 independent repeats of one pixel, drawn as 2000 identical pixels in a single stack
    scene = SceneObject.uniform(2000, 1, magnitude=v, phase=0.7)
    src = SourceParams.with_steps(s0, gamma=1.0, m_steps=m, seed=seed)
    noise = NoiseModel.poisson(noise_var) if noise_var else NoiseModel.off()
    stack = run_acquisition(scene, src, noise)
    res = reconstruct(stack.frames[0], src.phase_steps)
    return wrap_phase_error(res.phase[0], 0.7).var(ddof=1)


def test_criterion_3_monte_carlo_matches_variance_law():
    start = time.perf_counter()
    failures, lines, seed = [], [], 0
    for s0 in (50, 134):
        for v in (0.3, 0.8):
            for m in (4, 12):
                for k in (0, 2, 20):
                    seed += 1
                    emp = _cell_variance(s0, v, m, k * s0, seed)
                    pred = predict_phase_variance(s0, v, m, 1, k * s0)
                    rel = emp / pred - 1
                    lines.append(f"S0={s0} V={v} M={m} var={k}S0: {rel:+.1%}")
                    if abs(rel) > 0.15:
                        failures.append(lines[-1])
    elapsed = time.perf_counter() - start
    print("\n" + "\n".join(lines))
    ok = not failures and elapsed < 120
    verdict(3, ok, f"{24 - len(failures)}/24 cells within 15%, {elapsed:.1f} s"
            + (f"; outside: {'; '.join(failures)}" if failures else ""))


def test_criterion_4_background_invariance():
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(100):
        m = int(rng.choice([3, 4, 5, 12]))
        s0 = rng.uniform(10, 1000)
        scene = SceneObject(rng.uniform(0.1, 1, (4, 4)), rng.uniform(-math.pi, math.pi, (4, 4)))
        src = SourceParams.with_steps(s0, gamma=rng.uniform(0.1, 1), m_steps=m)
        frames = run_acquisition(scene, src, NoiseModel.off(), sample=False).frames[0]
        offset = rng.uniform(0, 200 * s0)
        base = reconstruct(frames, src.phase_steps).phase
        shifted = reconstruct(frames + offset, src.phase_steps).phase
        worst = max(worst, float(np.max(np.abs(wrap_phase_error(shifted, base)))))
    verdict(4, worst < 1e-12, f"max phase change {worst:.2e} over 100 cases")


def test_criterion_5_resilience():
    start = time.perf_counter()
    scene = glyph_scene("iof", 64, 64)
    ratios = [8, 252, 1000, 2500, 5000]
    ok, parts = True, []
    for seed in (1, 2, 3):
        src = SourceParams.with_steps(134, m_steps=12, repeats=8, seed=seed)
        rmse = [p.phase_rmse for p, _ in resilience_sweep(scene, src, NoiseModel.poisson(0), ratios)]
        increasing = all(a < b for a, b in zip(rmse, rmse[1:]))
        ok &= rmse[1] < 0.5 and rmse[2] < 0.5 and increasing
        parts.append(f"seed {seed}: " + ", ".join(f"{x:.3f}" for x in rmse))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    verdict(5, ok, f"RMSE at r={ratios} -> " + " | ".join(parts) + f", {elapsed:.1f} s")


def test_criterion_6_linearity_law():
    start = time.perf_counter()
    cfg = load_config(CONFIGS / "variance.ini")
    levels = [v for v in cfg.noise_variances if v > 0]
    assert max(levels) / min(levels) >= 100
    _, fits = variance_sweep(cfg.scene(), cfg.source(), cfg.noise_variances, cfg.mode_counts,
                             cfg.seed, cfg.stats_frames)
    elapsed = time.perf_counter() - start
    ok = len(fits) == 4 and elapsed < 120 and all(
        f is not None and 0.9 <= f.slope <= 1.1 and f.r_squared > 0.95 for f in fits.values())
    detail = ", ".join(f"K={k}: m={f.slope:.3f} R2={f.r_squared:.4f}" for k, f in fits.items())
    verdict(6, ok, f"{detail}, {elapsed:.1f} s")


def test_criterion_7_noise_moments():
    models = [NoiseModel.constant(500), NoiseModel.poisson(500), NoiseModel.gaussian(500, 2000),
              NoiseModel.speckle(500, 1), NoiseModel.speckle(500, 4), NoiseModel.off()]
    ok, parts = True, []
    for model in models:
        data = np.concatenate([sample_noise_frame(model, 100, 100, s).ravel()
                               for s in range(10)]).astype(float)
        mean, var = data.mean(), data.var(ddof=1)
        mu, sigma2 = noise_moments(model)
        good = math.isclose(mean, mu, rel_tol=0.05, abs_tol=0) if mu else mean == 0
        good &= math.isclose(var, sigma2, rel_tol=0.05) if sigma2 else var == 0
        if model.kind == "speckle":
            good &= poisson_check([(mean, var)])[0].label == "super"
        if model.kind == "constant":
            good &= var < mean
        ok &= good
        parts.append(f"{model.describe()} {mean:.1f}/{var:.1f}")
    verdict(7, ok, "; ".join(parts))


def test_criterion_8_cli_determinism(tmp_path, capsys):
    config = str(CONFIGS / "resilience.ini")
    for name in ("a", "b"):
        assert main(["resilience-sweep", "--config", config, "--out", str(tmp_path / name)]) == 0
    capsys.readouterr()
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    same = [n for n in files if (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()]
    csvs = [n for n in files if n.endswith(".csv")]
    verdict(8, same == files and len(csvs) > 0,
            f"{len(same)}/{len(files)} files byte-identical ({len(csvs)} CSVs)")
