"""Figure rendering for the report path. Every CSV the CLI writes has a
matching PNG produced here; figures are presentation-only and never feed
back into the pipeline."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .gapfill import DailySeries
from .metrics import DailyMetrics
from .sarimax import ForecastResult
from .service_fit import DurationHistogram, ErlangFit, erlang_pdf


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_daily_metrics(daily: Sequence[DailyMetrics], path: Path) -> None:
    days = [m.day for m in daily]
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.plot(days, [m.utilization for m in daily], label="utilization", lw=0.9)
    ax.plot(days, [m.occupancy for m in daily], label="occupancy", lw=0.9)
    ax.plot(days, [m.blocking for m in daily], label="blocking", lw=0.9)
    ax.set_ylim(0, 1)
    ax.set_ylabel("fraction of day")
    site = daily[0].site_id if daily else ""
    ax.set_title(f"Daily QoE metrics — site {site}")
    ax.legend(loc="upper right", fontsize=8)
    _save(fig, path)


def plot_service_fit(
    histogram: DurationHistogram, fit: ErlangFit, site_id: str, path: Path
) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(
        histogram.midpoints,
        histogram.density,
        width=histogram.bin_width * 0.9,
        alpha=0.5,
        label="empirical",
    )
    grid = np.linspace(0, histogram.midpoints[-1] + histogram.bin_width, 400)
    ax.plot(
        grid,
        erlang_pdf(grid, fit.shape_k, fit.rate),
        "r-",
        label=f"Erlang k={fit.shape_k}, rate={fit.rate:.4f}/min",
    )
    ax.set_xlabel("service time [min]")
    ax.set_ylabel("density")
    ax.set_title(f"Service-time fit — site {site_id} (RMSE {fit.rmse:.2e})")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_wait_histogram(
    bin_starts: np.ndarray, density: np.ndarray, site_id: str, path: Path
) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    width = bin_starts[1] - bin_starts[0] if len(bin_starts) > 1 else 1.0
    ax.bar(bin_starts, density, width=width * 0.95, align="edge")
    ax.set_xlabel("waiting time [min]")
    ax.set_ylabel("density")
    ax.set_title(f"Waiting-time distribution — site {site_id}")
    _save(fig, path)


def plot_filled_series(series: DailySeries, filled_mask: np.ndarray, path: Path) -> None:
    days = series.dates()
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.plot(days, series.values, lw=0.6, color="C0", label="daily requests")
    if np.any(filled_mask):
        filled_days = [d for d, f in zip(days, filled_mask) if f]
        filled_vals = series.values[np.asarray(filled_mask, dtype=bool)]
        ax.plot(filled_days, filled_vals, lw=0.6, color="C3", label="reconstructed")
    ax.set_ylabel("requests / day")
    ax.set_title(f"Gap-filled demand — site {series.site_id}")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_forecast(
    history_weeks: Sequence,
    history_y: np.ndarray,
    forecast_weeks: Sequence,
    result: ForecastResult,
    site_id: str,
    path: Path,
) -> None:
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.plot(history_weeks, history_y, lw=0.8, color="C0", label="observed")
    ax.plot(forecast_weeks, result.point, lw=1.0, color="C1", label="forecast")
    ax.fill_between(
        forecast_weeks,
        result.lower,
        result.upper,
        color="C1",
        alpha=0.25,
        label=f"{result.level:.0%} band",
    )
    ax.set_ylabel("requests / week")
    ax.set_title(f"Weekly demand forecast — site {site_id}")
    ax.legend(fontsize=8)
    _save(fig, path)
