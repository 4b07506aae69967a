"""Seasonal ARIMA with fractional differencing and exogenous regressors.

Fitting pipeline: seasonal differencing, then the fractional filter, then
OLS on the exogenous columns, then a multiplicative seasonal ARMA fitted to
the regression residuals by conditional sum of squares with a multi-start
Nelder-Mead search.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter
from scipy.stats import norm

from .errors import FitError, MissingExogData
from .fracdiff import (
    DEFAULT_TRUNCATION,
    frac_diff,
    invert_frac_diff,
    invert_seasonal_diff,
    seasonal_diff,
)

PENALTY = 1e10
MAX_EVALS = 2000
CSS_TOL = 1e-8
# Deterministic multi-start fills for every ARMA coefficient.
START_FILLS = (0.0, 0.1, -0.1, 0.3, -0.3)


@dataclass(frozen=True)
class SarimaxSpec:
    p: int = 0
    d: float = 0.0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = 52
    frac_truncation: int = DEFAULT_TRUNCATION

    def __post_init__(self) -> None:
        if min(self.p, self.q, self.P, self.Q, self.D) < 0:
            raise ValueError("orders must be non-negative")
        if not 0.0 <= self.d <= 1.5:
            raise ValueError("fractional d must lie in [0, 1.5]")
        if self.p + self.q + self.P + self.Q > 6:
            raise ValueError("total ARMA order capped at 6")
        if self.P + self.D + self.Q > 0 and self.s < 2:
            raise ValueError("seasonal terms need a period s >= 2")

    @property
    def n_arma_params(self) -> int:
        return self.p + self.q + self.P + self.Q

    def label(self) -> str:
        return f"({self.p},{self.d:g},{self.q})({self.P},{self.D},{self.Q})_{self.s}"


@dataclass
class SarimaxFit:
    spec: SarimaxSpec
    ar_coeffs: np.ndarray
    ma_coeffs: np.ndarray
    seasonal_ar: np.ndarray
    seasonal_ma: np.ndarray
    exog_coeffs: np.ndarray
    intercept: float
    residuals: np.ndarray
    sigma2: float
    n_obs: int
    converged: bool
    css: float
    # state needed to roll the model forward
    _y_history: np.ndarray = field(repr=False, default=None)
    _exog_history: np.ndarray | None = field(repr=False, default=None)
    _e_series: np.ndarray = field(repr=False, default=None)
    _a_series: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class ForecastResult:
    horizon: int
    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float


def _combined_ar_poly(ar: np.ndarray, sar: np.ndarray, s: int) -> np.ndarray:
    """Coefficients (low to high lag) of phi(B) * PHI(B^s), sign as in
    1 - phi_1 B - ... form."""
    base = np.concatenate([[1.0], -np.asarray(ar, dtype=float)])
    if len(sar):
        seasonal = np.zeros(len(sar) * s + 1)
        seasonal[0] = 1.0
        for i, coef in enumerate(sar, start=1):
            seasonal[i * s] = -coef
        base = np.convolve(base, seasonal)
    return base


def _combined_ma_poly(ma: np.ndarray, sma: np.ndarray, s: int) -> np.ndarray:
    """Coefficients of theta(B) * THETA(B^s), 1 + theta_1 B + ... form."""
    base = np.concatenate([[1.0], np.asarray(ma, dtype=float)])
    if len(sma):
        seasonal = np.zeros(len(sma) * s + 1)
        seasonal[0] = 1.0
        for i, coef in enumerate(sma, start=1):
            seasonal[i * s] = coef
        base = np.convolve(base, seasonal)
    return base


def _roots_ok(poly_low_to_high: np.ndarray) -> bool:
    """True when every root of the lag polynomial lies outside the unit
    circle (stationary / invertible factor)."""
    coeffs = np.trim_zeros(np.asarray(poly_low_to_high, dtype=float), "b")
    if len(coeffs) <= 1:
        return True
    roots = np.roots(coeffs[::-1])
    return bool(np.all(np.abs(roots) > 1.0 + 1e-8))


def _split_params(params: np.ndarray, spec: SarimaxSpec):
    p, q, P, Q = spec.p, spec.q, spec.P, spec.Q
    ar = params[:p]
    ma = params[p : p + q]
    sar = params[p + q : p + q + P]
    sma = params[p + q + P :]
    return ar, ma, sar, sma


def _css_residuals(
    e: np.ndarray, ar: np.ndarray, ma: np.ndarray, sar: np.ndarray, sma: np.ndarray, s: int
) -> np.ndarray:
    """One-step CSS innovations with zeroed pre-sample values."""
    ar_poly = _combined_ar_poly(ar, sar, s)
    ma_poly = _combined_ma_poly(ma, sma, s)
    return lfilter(ar_poly, ma_poly, e)


def _css_objective(params: np.ndarray, e: np.ndarray, spec: SarimaxSpec, burn: int) -> float:
    ar, ma, sar, sma = _split_params(params, spec)
    for factor in (
        np.concatenate([[1.0], -ar]),
        np.concatenate([[1.0], -sar]),
        np.concatenate([[1.0], ma]),
        np.concatenate([[1.0], sma]),
    ):
        if not _roots_ok(factor):
            return PENALTY * (1.0 + float(np.sum(np.abs(params))))
    a = _css_residuals(e, ar, ma, sar, sma, spec.s)
    return float(np.dot(a[burn:], a[burn:]))


def _transform(y: np.ndarray, spec: SarimaxSpec) -> np.ndarray:
    return frac_diff(seasonal_diff(y, spec.D, spec.s), spec.d, spec.frac_truncation)


def fit_sarimax(
    y: Sequence[float],
    exog: np.ndarray | None,
    spec: SarimaxSpec,
) -> SarimaxFit:
    """Fit the model to a weekly series (and optional exogenous matrix)."""
    y = np.asarray(y, dtype=float)
    if exog is not None:
        exog = np.asarray(exog, dtype=float)
        if exog.ndim == 1:
            exog = exog[:, None]
        if len(exog) != len(y):
            raise ValueError("exog must have one row per observation")
    n_exog = 0 if exog is None else exog.shape[1]

    w = _transform(y, spec)
    n_w = len(w)
    min_len = 3 * (spec.p + spec.q + spec.P + spec.Q + n_exog + 1)
    if n_w < max(min_len, 5):
        raise ValueError("series too short after differencing for this spec")

    if n_exog:
        x = np.column_stack([_transform(exog[:, j], spec) for j in range(n_exog)])
        design = np.column_stack([np.ones(n_w), x])
    else:
        design = np.ones((n_w, 1))
    coef, *_ = np.linalg.lstsq(design, w, rcond=None)
    intercept = float(coef[0])
    beta = coef[1:]
    e = w - design @ coef

    burn = spec.p + spec.P * spec.s
    n_params = spec.n_arma_params
    if n_params == 0:
        a = e.copy()
        css = float(np.dot(a[burn:], a[burn:]))
        best_params = np.empty(0)
        converged = True
    else:
        best: tuple[float, np.ndarray, bool] | None = None
        for fill in START_FILLS:
            x0 = np.full(n_params, fill)
            if _css_objective(x0, e, spec, burn) >= PENALTY:
                continue
            res = minimize(
                _css_objective,
                x0,
                args=(e, spec, burn),
                method="Nelder-Mead",
                options={
                    "maxfev": MAX_EVALS,
                    "fatol": CSS_TOL,
                    "xatol": 1e-6,
                },
            )
            if best is None or res.fun < best[0]:
                best = (float(res.fun), res.x, bool(res.success))
        if best is None:
            raise FitError(f"no feasible start for spec {spec.label()}")
        css, best_params, converged = best
        ar, ma, sar, sma = _split_params(best_params, spec)
        a = _css_residuals(e, ar, ma, sar, sma, spec.s)

    ar, ma, sar, sma = _split_params(best_params, spec)
    n_css = max(1, n_w - burn)
    sigma2 = css / n_css
    return SarimaxFit(
        spec=spec,
        ar_coeffs=np.asarray(ar, dtype=float),
        ma_coeffs=np.asarray(ma, dtype=float),
        seasonal_ar=np.asarray(sar, dtype=float),
        seasonal_ma=np.asarray(sma, dtype=float),
        exog_coeffs=np.asarray(beta, dtype=float),
        intercept=intercept,
        residuals=a[burn:],
        sigma2=float(sigma2),
        n_obs=n_w,
        converged=converged,
        css=float(css),
        _y_history=y,
        _exog_history=exog,
        _e_series=e,
        _a_series=a,
    )


def _psi_weights(fit: SarimaxFit, horizon: int) -> np.ndarray:
    ar_poly = _combined_ar_poly(fit.ar_coeffs, fit.seasonal_ar, fit.spec.s)
    ma_poly = _combined_ma_poly(fit.ma_coeffs, fit.seasonal_ma, fit.spec.s)
    impulse = np.zeros(horizon)
    impulse[0] = 1.0
    return lfilter(ma_poly, ar_poly, impulse)


def forecast(
    fit: SarimaxFit,
    horizon: int,
    future_exog: np.ndarray | None = None,
    level: float = 0.99,
) -> ForecastResult:
    """Multi-step forecast on the original scale with symmetric bands.

    The ARMA recursion runs on the differenced scale with future
    innovations zeroed; the psi-weight standard errors give the band on
    that scale, and point and band envelopes are each mapped back through
    the (linear, monotone) inversion of the differencing pipeline. Bands
    are clamped below at zero.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    spec = fit.spec
    n_exog = len(fit.exog_coeffs)
    if n_exog:
        if future_exog is None:
            raise MissingExogData("model has exogenous terms but no future exog given")
        future_exog = np.asarray(future_exog, dtype=float)
        if future_exog.ndim == 1:
            future_exog = future_exog[:, None]
        if future_exog.shape != (horizon, n_exog):
            raise MissingExogData(
                f"future exog must be {horizon}x{n_exog}, got {future_exog.shape}"
            )

    ar_poly = _combined_ar_poly(fit.ar_coeffs, fit.seasonal_ar, spec.s)
    ma_poly = _combined_ma_poly(fit.ma_coeffs, fit.seasonal_ma, spec.s)
    phi = -ar_poly[1:]
    theta = ma_poly[1:]

    n = len(fit._e_series)
    e_ext = np.concatenate([fit._e_series, np.zeros(horizon)])
    a_ext = np.concatenate([fit._a_series, np.zeros(horizon)])
    for h in range(horizon):
        t = n + h
        acc = 0.0
        for i, coef in enumerate(phi, start=1):
            if coef and t - i >= 0:
                acc += coef * e_ext[t - i]
        for j, coef in enumerate(theta, start=1):
            if coef and 0 <= t - j < n:
                acc += coef * a_ext[t - j]
        e_ext[t] = acc
    e_future = e_ext[n:]

    if n_exog:
        x_future = np.empty((horizon, n_exog))
        for j in range(n_exog):
            extended = np.concatenate([fit._exog_history[:, j], future_exog[:, j]])
            x_future[:, j] = _transform(extended, spec)[-horizon:]
        w_future = fit.intercept + x_future @ fit.exog_coeffs + e_future
    else:
        w_future = fit.intercept + e_future

    psi = _psi_weights(fit, horizon)
    sigma_h = np.sqrt(fit.sigma2 * np.cumsum(psi**2))
    z = norm.ppf(0.5 + level / 2.0)
    half = z * sigma_h

    ysd_history = seasonal_diff(fit._y_history, spec.D, spec.s)

    def invert(w_path: np.ndarray) -> np.ndarray:
        ysd_future = invert_frac_diff(w_path, ysd_history, spec.d, spec.frac_truncation)
        return invert_seasonal_diff(ysd_future, fit._y_history, spec.D, spec.s)

    point = invert(w_future)
    lower = np.maximum(invert(w_future - half), 0.0)
    upper = np.maximum(invert(w_future + half), 0.0)
    return ForecastResult(
        horizon=horizon, point=point, lower=lower, upper=upper, level=level
    )


DEFAULT_GRID = {
    "p": (0, 1, 2),
    "q": (0, 1, 2),
    "d": (0.4, 0.6, 0.8),
    "P": (0, 1),
    "D": (1,),
    "Q": (0, 1),
}


def _mape(actual: np.ndarray, predicted: np.ndarray) -> float:
    mask = actual != 0
    if not np.any(mask):
        return float("nan")
    return float(np.mean(np.abs((actual[mask] - predicted[mask]) / actual[mask]))) * 100.0


@dataclass(frozen=True)
class GridEntry:
    spec: SarimaxSpec
    mape: float | None
    converged: bool
    error: str | None = None


def grid_search(
    y: Sequence[float],
    exog: np.ndarray | None,
    n_validation: int,
    grid: dict | None = None,
    s: int = 52,
) -> tuple[SarimaxSpec, list[GridEntry]]:
    """Fit every grid combination on the training head and score MAPE on
    the validation tail; returns the argmin spec and the full leaderboard.

    Ties break toward fewer total parameters, then lexicographic order.
    """
    grid = grid or DEFAULT_GRID
    y = np.asarray(y, dtype=float)
    if n_validation < 1 or n_validation >= len(y):
        raise ValueError("validation split out of range")
    train_y = y[:-n_validation]
    valid_y = y[-n_validation:]
    if exog is not None:
        exog = np.asarray(exog, dtype=float)
        if exog.ndim == 1:
            exog = exog[:, None]
        train_x = exog[:-n_validation]
        valid_x = exog[-n_validation:]
    else:
        train_x = valid_x = None

    leaderboard: list[GridEntry] = []
    combos = itertools.product(
        grid.get("p", (0,)),
        grid.get("d", (0.0,)),
        grid.get("q", (0,)),
        grid.get("P", (0,)),
        grid.get("D", (0,)),
        grid.get("Q", (0,)),
    )
    for p, d, q, P, D, Q in combos:
        try:
            spec = SarimaxSpec(p=p, d=d, q=q, P=P, D=D, Q=Q, s=s)
            fit = fit_sarimax(train_y, train_x, spec)
            if not fit.converged:
                leaderboard.append(
                    GridEntry(spec=spec, mape=None, converged=False, error="not converged")
                )
                continue
            result = forecast(fit, n_validation, valid_x)
            mape = _mape(valid_y, result.point)
            leaderboard.append(GridEntry(spec=spec, mape=mape, converged=True))
        except Exception as exc:  # noqa: BLE001 - per-combination isolation
            spec_label = f"({p},{d},{q})({P},{D},{Q})"
            leaderboard.append(
                GridEntry(
                    spec=SarimaxSpec(s=s),
                    mape=None,
                    converged=False,
                    error=f"{spec_label}: {exc}",
                )
            )

    scored = [g for g in leaderboard if g.mape is not None and np.isfinite(g.mape)]
    if not scored:
        reasons = "; ".join(g.error or "unknown" for g in leaderboard[:10])
        raise FitError(f"every grid combination failed: {reasons}")

    def sort_key(entry: GridEntry):
        sp = entry.spec
        return (
            entry.mape,
            sp.p + sp.q + sp.P + sp.Q,
            (sp.p, sp.d, sp.q, sp.P, sp.D, sp.Q),
        )

    best = min(scored, key=sort_key)
    return best.spec, leaderboard


def write_forecast_csv(
    week_starts: Sequence, result: ForecastResult, stream: IO[str]
) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["week_start", "point", "lower", "upper"])
    for week, p, lo, hi in zip(week_starts, result.point, result.lower, result.upper):
        writer.writerow([week.isoformat(), f"{p:.4f}", f"{lo:.4f}", f"{hi:.4f}"])


def fit_sidecar(fit: SarimaxFit, validation_accuracy: dict | None = None) -> dict:
    sp = fit.spec
    return {
        "spec": {
            "p": sp.p,
            "d": sp.d,
            "q": sp.q,
            "P": sp.P,
            "D": sp.D,
            "Q": sp.Q,
            "s": sp.s,
            "frac_truncation": sp.frac_truncation,
        },
        "coefficients": {
            "ar": fit.ar_coeffs.tolist(),
            "ma": fit.ma_coeffs.tolist(),
            "seasonal_ar": fit.seasonal_ar.tolist(),
            "seasonal_ma": fit.seasonal_ma.tolist(),
            "exog": fit.exog_coeffs.tolist(),
            "intercept": fit.intercept,
        },
        "sigma2": fit.sigma2,
        "converged": fit.converged,
        "css": fit.css,
        "n_obs": fit.n_obs,
        "accuracy_on_validation": validation_accuracy,
    }
