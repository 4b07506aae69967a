import numpy as np
import pytest

from evqoe.ets import SMOOTHING_GRID, fit_ets


class TestGrid:
    def test_grid_span(self):
        assert SMOOTHING_GRID[0] == pytest.approx(0.01)
        assert SMOOTHING_GRID[-1] == pytest.approx(0.99)
        assert np.all(np.diff(SMOOTHING_GRID) == pytest.approx(0.07))


class TestHolt:
    def test_linear_trend_extrapolated(self):
        y = 10.0 + 2.0 * np.arange(50)
        fit = fit_ets(y)
        forecasted = fit.forecast(5)
        expected = 10.0 + 2.0 * np.arange(50, 55)
        np.testing.assert_allclose(forecasted, expected, atol=0.5)

    def test_flat_series(self):
        fit = fit_ets(np.full(40, 7.0))
        np.testing.assert_allclose(fit.forecast(10), 7.0, atol=0.1)

    def test_too_short(self):
        with pytest.raises(ValueError):
            fit_ets(np.array([1.0, 2.0]))

    def test_sse_is_minimal_over_grid(self):
        rng = np.random.default_rng(0)
        y = 20.0 + 0.5 * np.arange(60) + rng.normal(0, 1, 60)
        fit = fit_ets(y)
        assert fit.gamma is None and fit.seasonals is None
        # the chosen pair must be from the grid
        assert any(abs(fit.alpha - a) < 1e-12 for a in SMOOTHING_GRID)
        assert any(abs(fit.beta - b) < 1e-12 for b in SMOOTHING_GRID)


class TestHoltWinters:
    def test_seasonal_pattern_forecast(self):
        m = 12
        t = np.arange(10 * m)
        pattern = 15.0 * np.sin(2 * np.pi * t / m)
        y = 100.0 + 0.2 * t + pattern
        fit = fit_ets(y, seasonal_period=m)
        forecasted = fit.forecast(m)
        future_t = np.arange(10 * m, 11 * m)
        expected = 100.0 + 0.2 * future_t + 15.0 * np.sin(2 * np.pi * future_t / m)
        assert np.mean(np.abs(forecasted - expected)) < 2.0

    def test_seasonal_state_alignment(self):
        # a pure periodic series: one-step forecast must continue the cycle
        m = 4
        pattern = np.array([10.0, 30.0, 20.0, 40.0])
        y = np.tile(pattern, 12)
        fit = fit_ets(y, seasonal_period=m)
        forecasted = fit.forecast(4)
        np.testing.assert_allclose(forecasted, pattern, atol=1.0)

    def test_needs_two_periods(self):
        with pytest.raises(ValueError):
            fit_ets(np.ones(20), seasonal_period=12)
        with pytest.raises(ValueError):
            fit_ets(np.ones(20), seasonal_period=1)

    def test_forecast_beyond_one_period_wraps(self):
        m = 4
        y = np.tile([10.0, 30.0, 20.0, 40.0], 12)
        fit = fit_ets(y, seasonal_period=m)
        forecasted = fit.forecast(8)
        np.testing.assert_allclose(forecasted[:4], forecasted[4:], atol=1.0)
