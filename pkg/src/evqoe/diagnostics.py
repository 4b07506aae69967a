"""Box-Jenkins order diagnostics: ACF, PACF (Durbin-Levinson), and the
augmented Dickey-Fuller unit-root test with AIC lag selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

# Asymptotic Dickey-Fuller critical values, constant (no trend) case.
ADF_CRITICAL_VALUES = {"1%": -3.43, "5%": -2.86, "10%": -2.57}


def acf(series: np.ndarray, max_lag: int) -> np.ndarray:
    """Sample autocorrelations rho_0..rho_max_lag (rho_0 = 1)."""
    series = np.asarray(series, dtype=float)
    n = len(series)
    if n <= max_lag:
        raise ValueError("series must be longer than max_lag")
    centered = series - series.mean()
    denom = float(np.dot(centered, centered))
    if denom == 0.0:
        raise ValueError("constant series has undefined autocorrelation")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for h in range(1, max_lag + 1):
        out[h] = float(np.dot(centered[:-h], centered[h:])) / denom
    return out


def pacf(series: np.ndarray, max_lag: int) -> np.ndarray:
    """Partial autocorrelations via the Durbin-Levinson recursion.

    Index 0 is 1 by convention; index h is the lag-h partial correlation.
    """
    rho = acf(series, max_lag)
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    if max_lag == 0:
        return out
    phi_prev = np.array([rho[1]])
    out[1] = rho[1]
    for h in range(2, max_lag + 1):
        num = rho[h] - float(np.dot(phi_prev, rho[h - 1 : 0 : -1]))
        den = 1.0 - float(np.dot(phi_prev, rho[1:h]))
        phi_hh = num / den
        phi_prev = np.concatenate([phi_prev - phi_hh * phi_prev[::-1], [phi_hh]])
        out[h] = phi_hh
    return out


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    lags_used: int
    reject_at: dict[str, bool]  # keys "1%", "5%", "10%"


def _adf_regression(series: np.ndarray, lags: int) -> tuple[float, float, int]:
    """Fit dy_t = alpha + gamma*y_{t-1} + sum delta_i dy_{t-i}; returns
    (t-statistic of gamma, residual SSE, effective sample size)."""
    dy = np.diff(series)
    n_eff = len(dy) - lags
    if n_eff <= lags + 3:
        raise NumericalError("series too short for the requested lag order")
    y_lag = series[lags:-1]
    rows = [np.ones(n_eff), y_lag]
    for i in range(1, lags + 1):
        rows.append(dy[lags - i : len(dy) - i])
    x = np.column_stack(rows)
    target = dy[lags:]
    coef, _, rank, _ = np.linalg.lstsq(x, target, rcond=None)
    if rank < x.shape[1]:
        raise NumericalError("singular ADF regression design")
    resid = target - x @ coef
    sse = float(np.dot(resid, resid))
    dof = n_eff - x.shape[1]
    sigma2 = sse / dof
    xtx_inv = np.linalg.inv(x.T @ x)
    se_gamma = float(np.sqrt(sigma2 * xtx_inv[1, 1]))
    return float(coef[1] / se_gamma), sse, n_eff


def adf_test(series: np.ndarray, max_lags: int = 12) -> AdfResult:
    """Augmented Dickey-Fuller test (constant case); the augmentation lag
    is chosen by AIC over 0..max_lags."""
    series = np.asarray(series, dtype=float)
    if len(series) < 20 + max_lags:
        raise ValueError("series too short for ADF at this max_lags")
    best: tuple[float, int, float] | None = None  # (aic, lags, stat)
    for lags in range(max_lags + 1):
        try:
            stat, sse, n_eff = _adf_regression(series, lags)
        except NumericalError:
            continue
        k_params = lags + 2
        aic = n_eff * np.log(sse / n_eff) + 2 * k_params
        if best is None or aic < best[0]:
            best = (aic, lags, stat)
    if best is None:
        raise NumericalError("ADF regression failed at every lag order")
    _, lags_used, statistic = best
    reject = {
        level: statistic < critical
        for level, critical in ADF_CRITICAL_VALUES.items()
    }
    return AdfResult(statistic=statistic, lags_used=lags_used, reject_at=reject)
