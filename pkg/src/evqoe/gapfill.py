"""Pandemic-gap reconstruction for daily request series: leave-one-out
moving-average trend from non-gap days, empirical relative-residual
distribution, and stochastic refill of the gap."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import IO, Sequence

import numpy as np

from .errors import InsufficientData

DEFAULT_WINDOW_M = 30  # coerced to the next odd value for a centered window
MIN_RESIDUAL_SAMPLES = 50


@dataclass
class DailySeries:
    site_id: str
    start_date: date
    values: np.ndarray  # one non-negative value per day, contiguous

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)

    def dates(self) -> list[date]:
        return [self.start_date + timedelta(days=i) for i in range(len(self.values))]

    def index_of(self, day: date) -> int:
        return (day - self.start_date).days


@dataclass(frozen=True)
class GapSpec:
    gap_start: date = date(2020, 1, 1)
    gap_end: date = date(2021, 6, 30)  # inclusive
    window_m: int = DEFAULT_WINDOW_M

    @property
    def effective_window(self) -> int:
        # A centered window needs odd width; even inputs round up.
        m = max(3, self.window_m)
        return m if m % 2 == 1 else m + 1

    def mask(self, series: DailySeries) -> np.ndarray:
        """Boolean array marking in-gap days of the series."""
        n = len(series.values)
        mask = np.zeros(n, dtype=bool)
        lo = max(0, series.index_of(self.gap_start))
        hi = min(n, series.index_of(self.gap_end) + 1)
        if lo < hi:
            mask[lo:hi] = True
        return mask


@dataclass(frozen=True)
class ResidualDistribution:
    samples: np.ndarray  # relative differences (value - trend) / trend
    provenance_days: int
    skipped_zero_trend: int = 0


def moving_average_trend(
    values: np.ndarray, gap_mask: np.ndarray, window_m: int
) -> np.ndarray:
    """Centered leave-one-out moving average over non-gap days.

    Each day's trend is the mean of the surrounding window excluding the
    day itself and all gap days; windows truncate at the series edges.
    Days whose window holds no usable neighbor are linearly interpolated
    between the nearest computable trend values.
    """
    values = np.asarray(values, dtype=float)
    if len(values) < 3:
        raise ValueError("series must span at least 3 days")
    if window_m < 3 or window_m % 2 == 0:
        raise ValueError("window_m must be odd and >= 3")

    include = (~np.asarray(gap_mask, dtype=bool)).astype(float)
    kernel = np.ones(window_m)
    wsum = np.convolve(values * include, kernel, mode="same")
    wcnt = np.convolve(include, kernel, mode="same")
    # leave-one-out: drop the center day's own contribution
    wsum = wsum - values * include
    wcnt = wcnt - include

    trend = np.full(len(values), np.nan)
    usable = wcnt > 0
    trend[usable] = wsum[usable] / wcnt[usable]
    if not np.any(usable):
        raise ValueError("no computable trend anywhere in the series")
    if not np.all(usable):
        idx = np.arange(len(values))
        trend[~usable] = np.interp(idx[~usable], idx[usable], trend[usable])
    return trend


def relative_residuals(
    values: np.ndarray, trend: np.ndarray, gap_mask: np.ndarray
) -> ResidualDistribution:
    """Empirical distribution of (value - trend) / trend over non-gap days."""
    values = np.asarray(values, dtype=float)
    trend = np.asarray(trend, dtype=float)
    gap_mask = np.asarray(gap_mask, dtype=bool)
    eligible = ~gap_mask
    positive = trend > 0
    use = eligible & positive
    skipped = int(np.count_nonzero(eligible & ~positive))
    samples = (values[use] - trend[use]) / trend[use]
    if samples.size < MIN_RESIDUAL_SAMPLES:
        raise InsufficientData(
            f"need >= {MIN_RESIDUAL_SAMPLES} residual samples, got {samples.size}"
        )
    return ResidualDistribution(
        samples=samples, provenance_days=int(samples.size), skipped_zero_trend=skipped
    )


def reconstruct_gap(
    trend: np.ndarray,
    residuals: ResidualDistribution,
    gap_mask: np.ndarray,
    seed: int,
) -> np.ndarray:
    """Filled values for gap days: round(max(0, trend * (1 + draw))) with
    draws bootstrapped uniformly from the residual sample set."""
    gap_mask = np.asarray(gap_mask, dtype=bool)
    n_gap = int(np.count_nonzero(gap_mask))
    rng = np.random.default_rng(seed)
    draws = rng.choice(residuals.samples, size=n_gap, replace=True)
    raw = trend[gap_mask] * (1.0 + draws)
    return np.round(np.maximum(raw, 0.0))


def fill_gap(
    series: DailySeries, spec: GapSpec, seed: int, draws: int = 1
) -> tuple[DailySeries, np.ndarray]:
    """Reconstruct the gap period of a daily series.

    Returns the filled series and the boolean mask of filled days. With
    draws > 1 the fill is the rounded mean of that many seeded draws.
    Non-gap days pass through untouched.
    """
    gap_mask = spec.mask(series)
    if not np.any(gap_mask):
        return DailySeries(series.site_id, series.start_date, series.values.copy()), gap_mask
    trend = moving_average_trend(series.values, gap_mask, spec.effective_window)
    residuals = relative_residuals(series.values, trend, gap_mask)
    if draws < 1:
        raise ValueError("draws must be >= 1")
    fills = np.stack(
        [reconstruct_gap(trend, residuals, gap_mask, seed + i) for i in range(draws)]
    )
    filled_values = series.values.copy()
    filled_values[gap_mask] = np.round(fills.mean(axis=0))
    return DailySeries(series.site_id, series.start_date, filled_values), gap_mask


def write_filled_series_csv(
    series: DailySeries, filled_mask: np.ndarray, stream: IO[str]
) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["date", "n_requests", "filled_flag"])
    for day, value, flag in zip(series.dates(), series.values, filled_mask):
        writer.writerow([day.isoformat(), f"{value:g}", int(flag)])


def read_filled_series_csv(stream: IO[str], site_id: str = "") -> tuple[DailySeries, np.ndarray]:
    reader = csv.DictReader(line for line in stream if not line.startswith("#"))
    days: list[date] = []
    values: list[float] = []
    flags: list[bool] = []
    for row in reader:
        days.append(date.fromisoformat(row["date"]))
        values.append(float(row["n_requests"]))
        flags.append(bool(int(row["filled_flag"])))
    if not days:
        raise ValueError("empty series file")
    series = DailySeries(site_id=site_id, start_date=days[0], values=np.array(values))
    return series, np.array(flags, dtype=bool)
