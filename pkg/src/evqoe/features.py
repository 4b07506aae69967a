"""Calendar and exogenous feature derivation, smoothed target-mean encoding,
and weekly aggregation of daily demand series."""

from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import IO, Mapping, Sequence

import numpy as np

from .errors import MissingExogData, SchemaError
from .gapfill import DailySeries

MEAN_ENCODE_ALPHA = 10.0


@dataclass(frozen=True)
class TimestampFeatures:
    weekday: int        # 0 = Monday .. 6 = Sunday
    day_of_month: int   # 1..31
    day_of_year: int    # 1..365 (leap day 366 clamped to 365)
    month: int          # 1..12
    week_of_year: int   # 1..53 (ISO)
    week_of_month: int  # 1..4 (partial 5th weeks clamped)
    quarter: int        # 1..4
    year: int
    working_day: int    # 0: weekend/holiday, 1: business day


@dataclass(frozen=True)
class ServiceFeatures:
    rolling_avg_requests: float
    province_evcs: int
    province_evs: int
    region_evcs: int
    region_evs: int


@dataclass(frozen=True)
class EncodedFeature:
    name: str
    mapping: dict
    default: float  # global training-label mean, used for unseen categories

    def encode(self, category) -> float:
        return self.mapping.get(category, self.default)


@dataclass
class WeeklySeries:
    site_id: str
    week_starts: list[date]  # Mondays, contiguous
    y: np.ndarray            # weekly request totals
    exog: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.y = np.asarray(self.y, dtype=float)
        for name in self.exog:
            self.exog[name] = np.asarray(self.exog[name], dtype=float)
            if len(self.exog[name]) != len(self.y):
                raise ValueError(f"exog column {name} length mismatch")

    def exog_matrix(self, columns: Sequence[str] | None = None) -> np.ndarray:
        cols = list(columns) if columns is not None else sorted(self.exog)
        if not cols:
            return np.empty((len(self.y), 0))
        return np.column_stack([self.exog[c] for c in cols])


def calendar_features(day: date, holidays: set[date] | frozenset[date]) -> TimestampFeatures:
    iso = day.isocalendar()
    weekday = day.weekday()
    return TimestampFeatures(
        weekday=weekday,
        day_of_month=day.day,
        day_of_year=min(day.timetuple().tm_yday, 365),
        month=day.month,
        week_of_year=min(max(iso.week, 1), 53),
        week_of_month=min((day.day + 6) // 7, 4),
        quarter=(day.month - 1) // 3 + 1,
        year=day.year,
        working_day=0 if (weekday >= 5 or day in holidays) else 1,
    )


class Registry:
    """Step-function time series of EV / EVCS counts per scope."""

    def __init__(self) -> None:
        self._steps: dict[tuple[str, str], list[tuple[date, float]]] = {}

    def add(self, scope: str, metric: str, day: date, value: float) -> None:
        self._steps.setdefault((scope, metric), []).append((day, value))

    def sort(self) -> None:
        for steps in self._steps.values():
            steps.sort()

    def value_at(self, scope: str, metric: str, day: date) -> float:
        steps = self._steps.get((scope, metric))
        if not steps:
            raise MissingExogData(f"no registry entries for {scope}/{metric}")
        dates = [d for d, _ in steps]
        idx = bisect_right(dates, day) - 1
        if idx < 0:
            raise MissingExogData(
                f"{scope}/{metric}: {day.isoformat()} precedes first registry entry"
            )
        return steps[idx][1]

    def scopes(self) -> set[str]:
        return {scope for scope, _ in self._steps}


def load_registry(stream: IO[str]) -> Registry:
    """Registry CSV: date,scope,metric,value with scope in {province,
    region:<code>} and metric in {evs, evcs}."""
    reader = csv.DictReader(line for line in stream if not line.startswith("#"))
    required = {"date", "scope", "metric", "value"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise SchemaError("registry must have columns date,scope,metric,value")
    registry = Registry()
    for row in reader:
        registry.add(
            row["scope"], row["metric"], date.fromisoformat(row["date"]), float(row["value"])
        )
    registry.sort()
    return registry


def exog_features(
    day: date,
    registry: Registry,
    region: str,
    rolling_avg_requests: float = 0.0,
) -> ServiceFeatures:
    region_scope = f"region:{region}"
    return ServiceFeatures(
        rolling_avg_requests=rolling_avg_requests,
        province_evcs=int(registry.value_at("province", "evcs", day)),
        province_evs=int(registry.value_at("province", "evs", day)),
        region_evcs=int(registry.value_at(region_scope, "evcs", day)),
        region_evs=int(registry.value_at(region_scope, "evs", day)),
    )


def mean_encode(
    categories: Sequence,
    labels: Sequence[float],
    train_mask: Sequence[bool],
    name: str = "encoded",
    alpha: float = MEAN_ENCODE_ALPHA,
) -> EncodedFeature:
    """Smoothed target-mean encoding computed on training rows only:
    enc(c) = (n_c * mean_c + alpha * global_mean) / (n_c + alpha)."""
    categories = list(categories)
    labels = np.asarray(labels, dtype=float)
    train_mask = np.asarray(train_mask, dtype=bool)
    if len(categories) != len(labels) or len(labels) != len(train_mask):
        raise ValueError("categories, labels and train_mask must align")
    if not np.any(train_mask):
        raise ValueError("training mask selects no rows")
    train_labels = labels[train_mask]
    global_mean = float(train_labels.mean())

    sums: dict = {}
    counts: dict = {}
    for cat, label, in_train in zip(categories, labels, train_mask):
        if not in_train:
            continue
        sums[cat] = sums.get(cat, 0.0) + label
        counts[cat] = counts.get(cat, 0) + 1
    mapping = {
        cat: (sums[cat] + alpha * global_mean) / (counts[cat] + alpha)
        for cat in sums
    }
    return EncodedFeature(name=name, mapping=mapping, default=global_mean)


def weekly_aggregate(
    daily: DailySeries, exog_daily: Mapping[str, Sequence[float]] | None = None
) -> WeeklySeries:
    """Sum daily requests per ISO week (Monday start); exogenous columns are
    averaged. Partial first/last weeks are dropped."""
    n = len(daily.values)
    if n < 7:
        raise ValueError("need at least one full week of daily data")
    exog_daily = exog_daily or {}
    for name, col in exog_daily.items():
        if len(col) != n:
            raise ValueError(f"exog column {name} length mismatch")

    first_monday_offset = (7 - daily.start_date.weekday()) % 7
    usable = n - first_monday_offset
    n_weeks = usable // 7
    if n_weeks < 1:
        raise ValueError("need at least one full Monday-aligned week")

    week_starts = [
        daily.start_date + timedelta(days=first_monday_offset + 7 * w)
        for w in range(n_weeks)
    ]
    sl = slice(first_monday_offset, first_monday_offset + 7 * n_weeks)
    blocks = daily.values[sl].reshape(n_weeks, 7)
    y = blocks.sum(axis=1)
    exog = {
        name: np.asarray(col, dtype=float)[sl].reshape(n_weeks, 7).mean(axis=1)
        for name, col in exog_daily.items()
    }
    return WeeklySeries(site_id=daily.site_id, week_starts=week_starts, y=y, exog=exog)


def write_feature_matrix_csv(weekly: WeeklySeries, stream: IO[str]) -> None:
    columns = sorted(weekly.exog)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["week_start", "y"] + columns)
    for i, week in enumerate(weekly.week_starts):
        row = [week.isoformat(), f"{weekly.y[i]:g}"]
        row += [f"{weekly.exog[c][i]:.6f}" for c in columns]
        writer.writerow(row)
