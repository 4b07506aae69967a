from datetime import date, timedelta

import numpy as np

from evqoe.gapfill import DailySeries
from evqoe.metrics import DailyMetrics, DayCategory
from evqoe.plots import (
    plot_daily_metrics,
    plot_filled_series,
    plot_forecast,
    plot_service_fit,
    plot_wait_histogram,
)
from evqoe.sarimax import ForecastResult
from evqoe.service_fit import ErlangFit, empirical_service_distribution


def _png_ok(path):
    return path.exists() and path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_plot_daily_metrics(tmp_path):
    daily = [
        DailyMetrics("S", date(2022, 1, 1) + timedelta(days=i), DayCategory.WORKDAY,
                     10, 0.3, 0.5, 0.5, 0.1, 1)
        for i in range(30)
    ]
    out = tmp_path / "daily.png"
    plot_daily_metrics(daily, out)
    assert _png_ok(out)


def test_plot_service_fit(tmp_path):
    rng = np.random.default_rng(0)
    durations = rng.gamma(3, 10.0, 500)
    hist = empirical_service_distribution(durations)
    fit = ErlangFit(3, 0.1, 0.001, 30.0, 300.0, 500)
    out = tmp_path / "fit.png"
    plot_service_fit(hist, fit, "S", out)
    assert _png_ok(out)


def test_plot_wait_histogram(tmp_path):
    out = tmp_path / "wait.png"
    plot_wait_histogram(np.arange(5.0), np.array([0.5, 0.2, 0.1, 0.1, 0.1]), "S", out)
    assert _png_ok(out)


def test_plot_filled_series(tmp_path):
    series = DailySeries("S", date(2022, 1, 1), np.arange(60, dtype=float))
    mask = np.zeros(60, dtype=bool)
    mask[20:30] = True
    out = tmp_path / "filled.png"
    plot_filled_series(series, mask, out)
    assert _png_ok(out)


def test_plot_forecast(tmp_path):
    history_weeks = [date(2022, 1, 3) + timedelta(weeks=i) for i in range(20)]
    future_weeks = [history_weeks[-1] + timedelta(weeks=i) for i in range(1, 6)]
    result = ForecastResult(
        horizon=5,
        point=np.full(5, 10.0),
        lower=np.full(5, 8.0),
        upper=np.full(5, 12.0),
        level=0.99,
    )
    out = tmp_path / "forecast.png"
    plot_forecast(history_weeks, np.arange(20, dtype=float), future_weeks, result, "S", out)
    assert _png_ok(out)
