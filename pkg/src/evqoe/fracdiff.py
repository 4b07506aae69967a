"""Fractional and seasonal differencing transforms and their inverses.

The fractional filter (1-B)^d uses the truncated binomial expansion with
weights pi_0 = 1, pi_j = pi_{j-1} * (j - 1 - d) / j.
"""

from __future__ import annotations

import math

import numpy as np

DEFAULT_TRUNCATION = 100


def frac_diff_weights(d: float, n_weights: int) -> np.ndarray:
    """First n_weights binomial-expansion weights of (1-B)^d."""
    if d < 0:
        raise ValueError("d must be >= 0")
    weights = np.empty(n_weights)
    weights[0] = 1.0
    for j in range(1, n_weights):
        weights[j] = weights[j - 1] * (j - 1 - d) / j
    return weights


def _burn_in(d: float) -> int:
    # d = 0 is the identity; otherwise the first ceil(d) (at least 1)
    # values mix too little history to be meaningful.
    return 0 if d == 0 else max(1, math.ceil(d))


def frac_diff(
    series: np.ndarray, d: float, truncation: int = DEFAULT_TRUNCATION
) -> np.ndarray:
    """Apply (1-B)^d with truncated expanding-window weights.

    Output element t is sum_j pi_j * y[t - j] over j up to
    min(t, truncation); the first burn-in values are dropped (none for
    d = 0, one for 0 < d <= 1).
    """
    series = np.asarray(series, dtype=float)
    if d < 0:
        raise ValueError("d must be >= 0")
    n = len(series)
    if n == 0:
        return series.copy()
    n_weights = min(n - 1, truncation) + 1
    weights = frac_diff_weights(d, n_weights)
    out = np.convolve(series, weights)[:n]
    return out[_burn_in(d):]


def invert_frac_diff(
    diffed: np.ndarray,
    history: np.ndarray,
    d: float,
    truncation: int = DEFAULT_TRUNCATION,
) -> np.ndarray:
    """Invert the truncated fractional filter for values following history.

    Element h of diffed is taken as the filter output at original index
    len(history) + h; the original-scale values are recovered recursively
    via y_t = z_t - sum_{j>=1} pi_j * y_{t-j}.
    """
    diffed = np.asarray(diffed, dtype=float)
    history = np.asarray(history, dtype=float)
    n_hist = len(history)
    n_weights = min(n_hist + len(diffed) - 1, truncation) + 1
    weights = frac_diff_weights(d, n_weights)
    values = np.concatenate([history, np.zeros(len(diffed))])
    for h in range(len(diffed)):
        t = n_hist + h
        j_max = min(t, len(weights) - 1)
        tail = values[t - j_max : t][::-1]  # y_{t-1}, y_{t-2}, ...
        values[t] = diffed[h] - np.dot(weights[1 : j_max + 1], tail)
    return values[n_hist:]


def seasonal_diff(series: np.ndarray, D: int, s: int) -> np.ndarray:
    """Apply (1 - B^s) D times; drops the first D*s values."""
    series = np.asarray(series, dtype=float)
    if D < 0 or s < 1:
        raise ValueError("need D >= 0 and s >= 1")
    out = series.copy()
    for _ in range(D):
        if len(out) <= s:
            raise ValueError("series too short for seasonal differencing")
        out = out[s:] - out[:-s]
    return out


def invert_seasonal_diff(
    diffed: np.ndarray, history: np.ndarray, D: int, s: int
) -> np.ndarray:
    """Invert (1 - B^s)^D for values following history (original scale)."""
    diffed = np.asarray(diffed, dtype=float)
    history = np.asarray(history, dtype=float)
    if D == 0:
        return diffed.copy()
    if D > 1:
        # Rebuild the once-differenced continuation first, then integrate
        # it against the original history.
        inner = invert_seasonal_diff(diffed, seasonal_diff(history, 1, s), D - 1, s)
        return invert_seasonal_diff(inner, history, 1, s)
    if len(history) < s:
        raise ValueError("history too short to seed seasonal inversion")
    values = np.concatenate([history, np.zeros(len(diffed))])
    n_hist = len(history)
    for h in range(len(diffed)):
        values[n_hist + h] = diffed[h] + values[n_hist + h - s]
    return values[n_hist:]
