"""Empirical service-time distributions and Erlang-shape fitting.

Durations are in minutes throughout. The fitted law keeps the sample mean
exactly (rate = shape / mean); the integer shape is chosen by an RMSE scan
against the empirical histogram density.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .errors import InsufficientData

DEFAULT_BIN_WIDTH_MIN = 2.0
DEFAULT_MAX_SHAPE = 50
MIN_FIT_SAMPLES = 30


@dataclass(frozen=True)
class DurationHistogram:
    bin_width: float  # minutes
    counts: np.ndarray
    total: int

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.total * self.bin_width)

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(len(self.counts)) + 0.5) * self.bin_width


@dataclass(frozen=True)
class ErlangFit:
    shape_k: int
    rate: float  # per minute
    rmse: float
    sample_mean: float
    sample_var: float
    n_samples: int


def erlang_pdf(x: np.ndarray | float, shape_k: int, rate: float) -> np.ndarray:
    """Density of the sum of shape_k exponentials with the given rate."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    log_pdf = (
        shape_k * math.log(rate)
        + (shape_k - 1) * np.log(x[pos])
        - rate * x[pos]
        - math.lgamma(shape_k)
    )
    out[pos] = np.exp(log_pdf)
    return out


def empirical_service_distribution(
    durations: Sequence[float], bin_width: float = DEFAULT_BIN_WIDTH_MIN
) -> DurationHistogram:
    """Histogram of service durations over [0, max], normalized density."""
    arr = np.asarray(durations, dtype=float)
    if arr.size == 0:
        raise ValueError("durations must be non-empty")
    if np.any(arr <= 0):
        raise ValueError("durations must be positive")
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    n_bins = max(1, int(np.ceil(arr.max() / bin_width)))
    counts, _ = np.histogram(arr, bins=n_bins, range=(0.0, n_bins * bin_width))
    return DurationHistogram(bin_width=bin_width, counts=counts, total=int(arr.size))


def fit_rmse(histogram: DurationHistogram, shape_k: int, rate: float) -> float:
    """RMSE between empirical density and the Erlang pdf at bin midpoints."""
    diff = histogram.density - erlang_pdf(histogram.midpoints, shape_k, rate)
    return float(np.sqrt(np.mean(diff**2)))


def fit_erlang(
    durations: Sequence[float],
    bin_width: float = DEFAULT_BIN_WIDTH_MIN,
    max_shape: int = DEFAULT_MAX_SHAPE,
) -> ErlangFit:
    """Scan integer shapes 1..max_shape, rate tied to the sample mean, and
    pick the shape with the lowest histogram RMSE (ties to the smaller)."""
    arr = np.asarray(durations, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("durations must be positive")
    if arr.size < MIN_FIT_SAMPLES:
        raise InsufficientData(
            f"need at least {MIN_FIT_SAMPLES} durations, got {arr.size}"
        )
    histogram = empirical_service_distribution(arr, bin_width)
    mean = float(arr.mean())
    var = float(arr.var())

    best: tuple[float, int] | None = None
    for shape_k in range(1, max_shape + 1):
        rate = shape_k / mean
        rmse = fit_rmse(histogram, shape_k, rate)
        if best is None or rmse < best[0]:
            best = (rmse, shape_k)
    assert best is not None
    rmse, shape_k = best
    return ErlangFit(
        shape_k=shape_k,
        rate=shape_k / mean,
        rmse=rmse,
        sample_mean=mean,
        sample_var=var,
        n_samples=int(arr.size),
    )


def moment_shape_estimate(durations: Sequence[float]) -> int:
    """Moment-matching initializer round(mean^2 / var); informational only."""
    arr = np.asarray(durations, dtype=float)
    var = arr.var()
    if var == 0:
        return DEFAULT_MAX_SHAPE
    return max(1, int(round(arr.mean() ** 2 / var)))


def sample_service(fit: ErlangFit, rng: np.random.Generator, size: int | None = None):
    """Draw service durations (minutes) from the fitted Erlang law."""
    return rng.gamma(shape=fit.shape_k, scale=1.0 / fit.rate, size=size)


def fit_report(site_id: str, fit: ErlangFit) -> dict:
    return {
        "site_id": site_id,
        "shape_k": fit.shape_k,
        "rate_per_min": fit.rate,
        "rmse": fit.rmse,
        "sample_mean_min": fit.sample_mean,
        "sample_var_min2": fit.sample_var,
        "n_samples": fit.n_samples,
    }


def write_fit_report(reports: Sequence[dict], stream: IO[str]) -> None:
    json.dump(reports, stream, indent=2, sort_keys=True)
    stream.write("\n")
