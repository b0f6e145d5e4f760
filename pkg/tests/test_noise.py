import numpy as np
import pytest

from qhul.noise import (
    NoiseModel,
    characterize_noise,
    noise_moments,
    pixel_moments,
    sample_noise_frame,
    speckle_mean_for_variance,
)
from qhul.stats import poisson_check


def _pooled_draws(model, n_frames=10, size=100):
    frames = [sample_noise_frame(model, size, size, seed) for seed in range(n_frames)]
    data = np.concatenate([f.ravel() for f in frames]).astype(float)
    return data.mean(), data.var(ddof=1)


def test_closed_form_moments():
    assert noise_moments(NoiseModel.off()) == (0.0, 0.0)
    assert noise_moments(NoiseModel.poisson(500)) == (500.0, 500.0)
    assert noise_moments(NoiseModel.constant(500)) == (500.0, 0.0)
    assert noise_moments(NoiseModel.gaussian(500, 2000)) == (500.0, 2000.0)
    assert noise_moments(NoiseModel.speckle(500, 4)) == (500.0, 63000.0)


def test_speckle_moments_against_monte_carlo_oracle():
    # independent gamma-Poisson mixture with 10^6 draws
    rng = np.random.default_rng(2024)
    intensity = rng.gamma(shape=4, scale=500 / 4, size=1_000_000)
    counts = rng.poisson(intensity)
    mean, var = noise_moments(NoiseModel.speckle(500, 4))
    assert counts.mean() == pytest.approx(mean, rel=0.01)
    assert counts.var() == pytest.approx(var, rel=0.01)


def test_off_noise_is_zero():
    frame = sample_noise_frame(NoiseModel.off(), 5, 4, 1)
    assert frame.shape == (4, 5)
    assert not frame.any()


def test_poisson_noise_variance_to_mean():
    mean, var = _pooled_draws(NoiseModel.poisson(500))
    assert var / mean == pytest.approx(1.0, abs=0.05)


def test_speckle_noise_variance():
    mean, var = _pooled_draws(NoiseModel.speckle(500, 4))
    assert mean == pytest.approx(500, rel=0.05)
    assert var == pytest.approx(63000, rel=0.05)


def test_gaussian_noise_clamps_and_rounds():
    frame = sample_noise_frame(NoiseModel.gaussian(1.0, 100.0), 200, 200, 3)
    assert frame.dtype == np.int64
    assert frame.min() == 0
    mean, var = _pooled_draws(NoiseModel.gaussian(500, 2000))
    assert mean == pytest.approx(500, rel=0.05)
    assert var == pytest.approx(2000, rel=0.05)


def test_invalid_models_rejected():
    with pytest.raises(ValueError):
        NoiseModel.gaussian(10, -1)
    with pytest.raises(ValueError):
        NoiseModel.poisson(-1)
    with pytest.raises(ValueError):
        NoiseModel.speckle(10, 0)
    with pytest.raises(ValueError):
        NoiseModel("pink", 1.0)


def test_sampling_is_deterministic_in_seed():
    model = NoiseModel.speckle(300, 2)
    assert np.array_equal(sample_noise_frame(model, 16, 16, 42), sample_noise_frame(model, 16, 16, 42))
    assert not np.array_equal(sample_noise_frame(model, 16, 16, 42),
                              sample_noise_frame(model, 16, 16, 43))


def test_speckle_variance_decreases_with_modes():
    variances = [noise_moments(NoiseModel.speckle(500, k))[1] for k in (1, 2, 4, 8, 10**6)]
    assert all(a > b for a, b in zip(variances, variances[1:]))
    assert variances[-1] == pytest.approx(500, rel=1e-3)


def test_speckle_mean_for_variance_inverts_moments():
    for var in (0.0, 10.0, 800.0, 80400.0):
        for k in (1, 2, 4, 8):
            mu = speckle_mean_for_variance(var, k)
            assert noise_moments(NoiseModel.speckle(mu, k))[1] == pytest.approx(var, rel=1e-12, abs=1e-12)


def test_spatial_mask_scales_mean_and_follows_mean_variance_law():
    mask = np.zeros((60, 60))
    mask[:, 30:] = 2.0
    mask[:, 15:30] = 0.5
    model = NoiseModel.poisson(200, spatial_mask=mask)
    frames = [sample_noise_frame(model, 60, 60, s) for s in range(400)]
    stats = characterize_noise(frames)
    mu, var = pixel_moments(model, (60, 60))
    assert np.all(stats.mean[:, :15] == 0)
    for cols, level in ((slice(15, 30), 100.0), (slice(30, 60), 400.0)):
        assert stats.mean[:, cols].mean() == pytest.approx(level, rel=0.01)
        assert stats.variance[:, cols].mean() == pytest.approx(level, rel=0.05)
        assert np.all(mu[:, cols] == level) and np.all(var[:, cols] == level)

    speckle = NoiseModel.speckle(100, 4, spatial_mask=mask)
    _, svar = pixel_moments(speckle, (60, 60))
    assert svar[0, 40] == pytest.approx(200 + 200**2 / 4)


def test_mask_shape_must_match():
    model = NoiseModel.poisson(5, spatial_mask=np.ones((3, 3)))
    with pytest.raises(ValueError):
        sample_noise_frame(model, 4, 4, 0)


def test_characterize_identical_frames():
    frames = [np.full((5, 6), 7)] * 12
    stats = characterize_noise(frames)
    assert stats.n_frames == 12
    assert np.all(stats.mean == 7)
    assert np.all(stats.variance == 0)
    assert stats.pooled() == (7.0, 0.0)
    assert stats.points.shape == (30, 2)


def test_characterize_needs_two_equal_frames():
    with pytest.raises(ValueError):
        characterize_noise([np.zeros((2, 2))])
    with pytest.raises(ValueError):
        characterize_noise([np.zeros((2, 2)), np.zeros((2, 3))])


def test_twelve_poisson_frames_cluster_on_the_unit_line():
    frames = [sample_noise_frame(NoiseModel.poisson(500), 64, 64, s) for s in range(12)]
    mean, var = characterize_noise(frames).pooled()
    assert var / mean == pytest.approx(1.0, abs=0.05)
    assert poisson_check([(mean, var)])[0].label == "poisson"


def test_twelve_speckle_frames_lie_above_the_unit_line():
    frames = [sample_noise_frame(NoiseModel.speckle(500, 4), 64, 64, s) for s in range(12)]
    stats = characterize_noise(frames)
    mean, var = stats.pooled()
    assert var > 10 * mean
    labels = {p.label for p in poisson_check(stats)}
    assert labels <= {"super", "poisson", "sub"}
    assert np.mean([p.label == "super" for p in poisson_check(stats)]) > 0.95


@pytest.mark.parametrize("model", [
    NoiseModel.constant(500),
    NoiseModel.poisson(500),
    NoiseModel.gaussian(500, 2000),
    NoiseModel.speckle(500, 4),
])
def test_characterize_reproduces_closed_form(model):
    frames = [sample_noise_frame(model, 10, 10, s) for s in range(10_000)]
    mean, var = characterize_noise(frames).pooled()
    mu, sigma2 = noise_moments(model)
    assert mean == pytest.approx(mu, rel=0.05)
    assert var == pytest.approx(sigma2, rel=0.05, abs=1e-9)
