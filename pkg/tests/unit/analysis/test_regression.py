import numpy as np
import pytest

from analysis.regression import bootstrap_slope_ci, fit_loglog


def test_recovers_power_law():
    gammas = [2.0, 4.0, 8.0, 16.0]
    fit = fit_loglog([(g, 3.0 * g**-1.0) for g in gammas])
    assert fit.slope == pytest.approx(-1.0)
    assert fit.intercept == pytest.approx(np.log(3.0))
    np.testing.assert_allclose(fit.residuals, 0.0, atol=1e-12)
    np.testing.assert_allclose(fit.predict([32.0]), [3.0 / 32.0])


def test_log_correction_lies_in_rate_band():
    # √(log γ)/γ over a moderate range
    fit = fit_loglog([(g, np.sqrt(np.log(g)) / g) for g in [8.0, 16.0, 32.0, 64.0, 128.0]])
    assert -1.0 < fit.slope < -0.8


@pytest.mark.parametrize(
    "rows",
    [
        [(2.0, 1.0), (4.0, 0.5)],
        [(2.0, 1.0), (4.0, 0.0), (8.0, 0.1)],
        [(2.0, 1.0), (-4.0, 0.5), (8.0, 0.1)],
    ],
)
def test_rejects_bad_rows(rows):
    with pytest.raises(ValueError):
        fit_loglog(rows)


def test_slope_ci_contains_point_estimate():
    rng = np.random.default_rng(3)
    replicates = {
        g: g**-1.0 * np.exp(0.05 * rng.standard_normal(8)) for g in [2.0, 4.0, 8.0, 16.0]
    }
    low, high = bootstrap_slope_ci(replicates, n_resamples=100, seed=3)
    point = fit_loglog([(g, float(np.mean(r))) for g, r in replicates.items()]).slope
    assert low <= point <= high
    assert low < -0.9 and high > -1.1
    assert high - low < 0.2
    assert bootstrap_slope_ci(replicates, n_resamples=100, seed=3) == (low, high)


def test_slope_ci_narrows_with_more_replicates():
    rng = np.random.default_rng(8)
    widths = []
    for reps in (4, 64):
        replicates = {
            g: g**-1.0 * np.exp(0.1 * rng.standard_normal(reps)) for g in [2.0, 4.0, 8.0, 16.0]
        }
        low, high = bootstrap_slope_ci(replicates, n_resamples=200, seed=8)
        widths.append(high - low)
    # width scales like 1/√replicates
    assert widths[1] < 0.5 * widths[0]
