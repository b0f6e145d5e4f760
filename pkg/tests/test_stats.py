import math

import numpy as np
import pytest

from qhul.holography import predict_phase_variance
from qhul.noise import NoiseModel, characterize_noise, sample_noise_frame
from qhul.stats import classify_ratio, loglog_fit, poisson_check


def test_identity_line():
    fit = loglog_fit([(1, 1), (10, 10), (100, 100)])
    assert fit.slope == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.n_points == 3


def test_doubled_line_has_log2_intercept():
    fit = loglog_fit([(x, 2 * x) for x in (1, 3, 30, 300)])
    assert fit.slope == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log10(2), abs=1e-12)


def test_variance_law_slope_tends_to_one_at_high_noise():
    s0 = 134
    xs = [2 * s0 * k for k in (100, 300, 1000, 3000, 10000)]
    fit = loglog_fit([(x, predict_phase_variance(s0, 0.5, 12, 1, x)) for x in xs])
    assert fit.slope == pytest.approx(1.0, abs=0.01)
    low = loglog_fit([(x, predict_phase_variance(s0, 0.5, 12, 1, x)) for x in (0.01, 0.1, 1)])
    assert low.slope < 0.01


def test_scale_equivariance():
    rng = np.random.default_rng(3)
    pts = [(x, x ** 0.8 * rng.uniform(0.9, 1.1)) for x in np.geomspace(1, 1e4, 9)]
    base = loglog_fit(pts)
    scaled = loglog_fit([(10 * x, 10 * y) for x, y in pts])
    assert scaled.slope == pytest.approx(base.slope, abs=1e-12)
    assert scaled.intercept == pytest.approx(base.intercept + 1 - base.slope, abs=1e-12)
    assert scaled.r_squared == pytest.approx(base.r_squared, abs=1e-12)


def test_power_law_is_collinear():
    fit = loglog_fit([(x, 5 * x ** 1.7) for x in (2, 7, 40, 900)])
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.slope == pytest.approx(1.7, abs=1e-12)
    assert np.allclose(fit.residuals, 0, atol=1e-12)
    assert "slope=" in fit.summary()


@pytest.mark.parametrize("pts", [[(1, 1)], [(0, 1), (2, 2)], [(1, -1), (2, 2)],
                                 [(3, 1), (3, 2)], [(1, math.nan), (2, 2)]])
def test_bad_fit_input(pts):
    with pytest.raises(ValueError):
        loglog_fit(pts)


def test_classify_band():
    assert classify_ratio(0.94) == "sub"
    assert classify_ratio(1.04) == "poisson"
    assert classify_ratio(1.06) == "super"


def test_poisson_check_on_noise_variants():
    def pooled(model):
        frames = [sample_noise_frame(model, 32, 32, s) for s in range(200)]
        return characterize_noise(frames).pooled()

    pois = poisson_check([pooled(NoiseModel.poisson(500))])[0]
    assert pois.label == "poisson"
    speck = poisson_check([pooled(NoiseModel.speckle(500, 4))])[0]
    assert speck.label == "super"
    assert speck.ratio == pytest.approx(1 + 500 / 4, rel=0.05)
    const = poisson_check([pooled(NoiseModel.constant(500))])[0]
    assert const.label == "sub" and const.ratio == 0.0
    assert poisson_check([(0.0, 0.0)])[0].label == "skipped"
