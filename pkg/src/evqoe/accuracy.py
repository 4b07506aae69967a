"""Forecast accuracy metrics and the multi-model backtest harness."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date
from typing import IO, Sequence

import numpy as np

from . import sarimax
from .ets import fit_ets
from .features import WeeklySeries


@dataclass(frozen=True)
class AccuracyReport:
    mse: float
    rmse: float
    mape: float | None  # None when every actual is zero
    mae: float
    skipped_zero_actuals: int = 0


def accuracy(actual: Sequence[float], predicted: Sequence[float]) -> AccuracyReport:
    actual = np.asarray(actual, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if actual.shape != predicted.shape or actual.size == 0:
        raise ValueError("actual and predicted must be equal-length and non-empty")
    err = actual - predicted
    mse = float(np.mean(err**2))
    mae = float(np.mean(np.abs(err)))
    nonzero = actual != 0
    skipped = int(np.count_nonzero(~nonzero))
    if np.any(nonzero):
        mape = float(np.mean(np.abs(err[nonzero] / actual[nonzero]))) * 100.0
    else:
        mape = None
    return AccuracyReport(
        mse=mse, rmse=float(np.sqrt(mse)), mape=mape, mae=mae, skipped_zero_actuals=skipped
    )


@dataclass
class BacktestRow:
    model: str
    report: AccuracyReport | None
    error: str | None = None


def read_external_predictions(stream: IO[str]) -> dict[date, float]:
    """Third-party baseline file: week_start,predicted."""
    reader = csv.DictReader(line for line in stream if not line.startswith("#"))
    out: dict[date, float] = {}
    for row in reader:
        out[date.fromisoformat(row["week_start"])] = float(row["predicted"])
    return out


def backtest(
    weekly: WeeklySeries,
    exog_columns: Sequence[str],
    n_test: int,
    sarimax_spec: sarimax.SarimaxSpec,
    seasonal_period: int = 52,
    external_predictions: dict[str, dict[date, float]] | None = None,
) -> list[BacktestRow]:
    """Train every model on the head of the weekly series and score the
    last n_test weeks. Failures are isolated into marker rows."""
    y = weekly.y
    if n_test < 1 or n_test >= len(y):
        raise ValueError("test range out of bounds")
    train_y, test_y = y[:-n_test], y[-n_test:]
    exog = weekly.exog_matrix(exog_columns) if exog_columns else None
    if exog is not None:
        train_x, test_x = exog[:-n_test], exog[-n_test:]
    else:
        train_x = test_x = None
    test_weeks = weekly.week_starts[-n_test:]

    rows: list[BacktestRow] = []

    def run(name: str, predict):
        try:
            predicted = np.asarray(predict(), dtype=float)
            if predicted.shape != test_y.shape:
                raise ValueError(
                    f"prediction length {predicted.size} != test length {test_y.size}"
                )
            rows.append(BacktestRow(model=name, report=accuracy(test_y, predicted)))
        except Exception as exc:  # noqa: BLE001 - isolate per-model failures
            rows.append(BacktestRow(model=name, report=None, error=str(exc)))

    def sarimax_points(use_exog: bool, spec: sarimax.SarimaxSpec):
        fit = sarimax.fit_sarimax(train_y, train_x if use_exog else None, spec)
        fx = test_x if use_exog else None
        return sarimax.forecast(fit, n_test, fx).point

    run("SARIMAX", lambda: sarimax_points(train_x is not None, sarimax_spec))
    run("SARIMA", lambda: sarimax_points(False, sarimax_spec))
    arima_spec = sarimax.SarimaxSpec(
        p=max(sarimax_spec.p, 1),
        d=sarimax_spec.d,
        q=sarimax_spec.q,
        P=0,
        D=0,
        Q=0,
        s=sarimax_spec.s,
    )
    run("ARIMA", lambda: sarimax_points(False, arima_spec))
    run(
        "ETS-seasonal",
        lambda: fit_ets(train_y, seasonal_period=seasonal_period).forecast(n_test),
    )
    run("ETS", lambda: fit_ets(train_y).forecast(n_test))

    for name, mapping in (external_predictions or {}).items():
        def external(mapping=mapping):
            missing = [w for w in test_weeks if w not in mapping]
            if missing:
                raise ValueError(f"missing predictions for {len(missing)} test week(s)")
            return [mapping[w] for w in test_weeks]

        run(name, external)
    return rows


def write_backtest_csv(rows: Sequence[BacktestRow], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["model", "mse", "rmse", "mape", "mae"])
    for row in rows:
        if row.report is None:
            writer.writerow([row.model, "FAILED", "FAILED", "FAILED", row.error])
            continue
        r = row.report
        mape = "NA" if r.mape is None else f"{r.mape:.4f}"
        writer.writerow(
            [row.model, f"{r.mse:.4f}", f"{r.rmse:.4f}", mape, f"{r.mae:.4f}"]
        )
