"""Additive Holt-Winters exponential smoothing baselines (with and without
a seasonal component), tuned by a one-step squared-error grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SMOOTHING_GRID = np.arange(0.01, 1.0, 0.07)  # 0.01 .. 0.99 step 0.07


@dataclass
class EtsFit:
    alpha: float
    beta: float
    gamma: float | None
    level: float
    trend: float
    seasonals: np.ndarray | None  # length-m state, None when non-seasonal
    period: int | None
    sse: float
    n_obs: int

    def forecast(self, horizon: int) -> np.ndarray:
        h = np.arange(1, horizon + 1)
        out = self.level + h * self.trend
        if self.seasonals is not None:
            m = self.period
            out = out + np.array([self.seasonals[(i - 1) % m] for i in h])
        return out


def _run_holt(y: np.ndarray, alpha: float, beta: float):
    level, trend = y[0], y[1] - y[0]
    sse = 0.0
    for t in range(1, len(y)):
        f = level + trend
        err = y[t] - f
        sse += err * err
        new_level = alpha * y[t] + (1 - alpha) * (level + trend)
        trend = beta * (new_level - level) + (1 - beta) * trend
        level = new_level
    return sse, level, trend


def _run_holt_winters(y: np.ndarray, m: int, alpha: float, beta: float, gamma: float):
    first = y[:m].mean()
    second = y[m : 2 * m].mean()
    level = first
    trend = (second - first) / m
    seasonals = (y[:m] - first).astype(float).copy()
    sse = 0.0
    for t in range(m, len(y)):
        idx = t % m
        f = level + trend + seasonals[idx]
        err = y[t] - f
        sse += err * err
        new_level = alpha * (y[t] - seasonals[idx]) + (1 - alpha) * (level + trend)
        trend = beta * (new_level - level) + (1 - beta) * trend
        seasonals[idx] = gamma * (y[t] - new_level) + (1 - gamma) * seasonals[idx]
        level = new_level
    # roll the seasonal state so index 0 is one step ahead of the sample end
    offset = len(y) % m
    rolled = np.array([seasonals[(offset + i) % m] for i in range(m)])
    return sse, level, trend, rolled


def fit_ets(series: np.ndarray, seasonal_period: int | None = None) -> EtsFit:
    """Fit additive ETS; smoothing parameters picked by grid search on the
    summed one-step squared errors."""
    y = np.asarray(series, dtype=float)
    if seasonal_period is not None:
        if seasonal_period < 2:
            raise ValueError("seasonal period must be >= 2")
        if len(y) < 2 * seasonal_period:
            raise ValueError("need at least two full periods for seasonal ETS")
    elif len(y) < 3:
        raise ValueError("series too short")

    best: EtsFit | None = None
    if seasonal_period is None:
        for alpha in SMOOTHING_GRID:
            for beta in SMOOTHING_GRID:
                sse, level, trend = _run_holt(y, alpha, beta)
                if best is None or sse < best.sse:
                    best = EtsFit(
                        alpha=float(alpha),
                        beta=float(beta),
                        gamma=None,
                        level=level,
                        trend=trend,
                        seasonals=None,
                        period=None,
                        sse=sse,
                        n_obs=len(y),
                    )
    else:
        for alpha in SMOOTHING_GRID:
            for beta in SMOOTHING_GRID:
                for gamma in SMOOTHING_GRID:
                    sse, level, trend, seasonals = _run_holt_winters(
                        y, seasonal_period, alpha, beta, gamma
                    )
                    if best is None or sse < best.sse:
                        best = EtsFit(
                            alpha=float(alpha),
                            beta=float(beta),
                            gamma=float(gamma),
                            level=level,
                            trend=trend,
                            seasonals=seasonals,
                            period=seasonal_period,
                            sse=sse,
                            n_obs=len(y),
                        )
    assert best is not None
    return best
