"""Per-site, per-day QoE metrics: request counts, utilization, occupancy,
idleness, blocking, delayed-EV counts, threshold-band summaries, and
fleet-level adequacy ratios."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone
from enum import Enum
from typing import IO, Iterable, Sequence

import numpy as np

from .ingest import SLOT_SECONDS, OccupancyTimeline, SessionRecord, Site, build_occupancy_timeline


class DayCategory(Enum):
    WORKDAY = "Workday"
    WEEKEND = "Weekend"
    HOLIDAY = "Holiday"


@dataclass(frozen=True)
class DailyMetrics:
    site_id: str
    day: date
    category: DayCategory
    n_requests: int
    utilization: float
    occupancy: float
    idleness: float
    blocking: float
    n_delayed: int


@dataclass(frozen=True)
class ThresholdSummary:
    site_id: str
    year: int
    metric: str
    band_low: float
    band_high: float
    low_closed: bool
    high_closed: bool
    day_count: int


@dataclass(frozen=True)
class FleetRatios:
    evcr: float  # EVs per charger
    evcp: float  # kW per EV


@dataclass(frozen=True)
class DelayRule:
    threshold: timedelta = timedelta(minutes=5)

    def __post_init__(self) -> None:
        if self.threshold <= timedelta(0):
            raise ValueError("delay threshold must be positive")


# Default bands mirror the 10% / 30% cut points; the 30% boundary belongs
# to the middle band.
DEFAULT_BANDS: list[tuple[float, float, bool, bool]] = [
    (0.0, 0.1, True, False),   # [0, 0.1)
    (0.1, 0.3, True, True),    # [0.1, 0.3]
    (0.3, 1.0, False, True),   # (0.3, 1]
]


def _check_timeline(timeline: OccupancyTimeline) -> None:
    if len(timeline.counts) == 0:
        raise ValueError("timeline has no slots")


def count_requests(sessions: Iterable[SessionRecord], day: date) -> int:
    """Number of (merged) sessions whose start time falls on the given UTC day."""
    return sum(1 for s in sessions if s.start_time.date() == day)


def utilization(timeline: OccupancyTimeline) -> float:
    _check_timeline(timeline)
    total = int(np.sum(timeline.counts))
    return total / (len(timeline.counts) * timeline.num_chargers)


def occupancy(timeline: OccupancyTimeline) -> float:
    _check_timeline(timeline)
    occupied = int(np.count_nonzero(timeline.counts))
    return occupied / len(timeline.counts)


def idleness(timeline: OccupancyTimeline) -> float:
    # Computed from the same slot counts as occupancy so the pair always
    # forms an exact complement at the integer level.
    _check_timeline(timeline)
    occupied = int(np.count_nonzero(timeline.counts))
    return (len(timeline.counts) - occupied) / len(timeline.counts)


def blocking(timeline: OccupancyTimeline) -> float:
    _check_timeline(timeline)
    full = int(np.count_nonzero(timeline.counts == timeline.num_chargers))
    return full / len(timeline.counts)


def delayed_evs(
    sessions: Sequence[SessionRecord],
    timeline: OccupancyTimeline,
    rule: DelayRule = DelayRule(),
) -> int:
    """Count sessions that started within the threshold of a predecessor's
    end while the site was fully blocked at that end instant."""
    ordered = sorted(sessions, key=lambda s: s.start_time)
    window_start = timeline.window_start
    n_slots = len(timeline.counts)
    delayed = 0
    for s in ordered:
        for p in ordered:
            gap = s.start_time - p.end_time
            if not (timedelta(0) < gap <= rule.threshold):
                continue
            # last slot the predecessor occupied (an end on a minute boundary
            # belongs to the slot just before it)
            end_off = (p.end_time - window_start).total_seconds()
            slot = int((end_off - 1) // SLOT_SECONDS)
            if 0 <= slot < n_slots and timeline.counts[slot] == timeline.num_chargers:
                delayed += 1
                break
    return delayed


def day_category(day: date, holidays: frozenset[date] | set[date]) -> DayCategory:
    if day in holidays:
        return DayCategory.HOLIDAY
    if day.weekday() >= 5:
        return DayCategory.WEEKEND
    return DayCategory.WORKDAY


def daily_report(
    site: Site,
    sessions: Sequence[SessionRecord],
    start_day: date,
    end_day: date,
    holidays: set[date],
    delay_rule: DelayRule = DelayRule(),
) -> list[DailyMetrics]:
    """One DailyMetrics per day in [start_day, end_day), each over a
    1440-slot timeline. Requests attribute to the day of their start."""
    results: list[DailyMetrics] = []
    day = start_day
    while day < end_day:
        window_start = datetime.combine(day, time(0, 0), tzinfo=timezone.utc)
        window_end = window_start + timedelta(days=1)
        overlapping = [
            s
            for s in sessions
            if s.start_time < window_end and s.end_time > window_start
        ]
        timeline = build_occupancy_timeline(site, overlapping, window_start, window_end)
        results.append(
            DailyMetrics(
                site_id=site.site_id,
                day=day,
                category=day_category(day, holidays),
                n_requests=count_requests(sessions, day),
                utilization=utilization(timeline),
                occupancy=occupancy(timeline),
                idleness=idleness(timeline),
                blocking=blocking(timeline),
                n_delayed=delayed_evs(overlapping, timeline, delay_rule),
            )
        )
        day += timedelta(days=1)
    return results


def _in_band(value: float, band: tuple[float, float, bool, bool]) -> bool:
    low, high, low_closed, high_closed = band
    above = value >= low if low_closed else value > low
    below = value <= high if high_closed else value < high
    return above and below


def threshold_summary(
    daily: Sequence[DailyMetrics],
    metric: str,
    bands: Sequence[tuple[float, float, bool, bool]] = tuple(DEFAULT_BANDS),
) -> list[ThresholdSummary]:
    """Count days per metric band. Bands must partition [0, 1]."""
    if metric not in ("utilization", "occupancy", "idleness", "blocking"):
        raise ValueError(f"unknown metric: {metric}")
    ordered = sorted(bands)
    for (l0, h0, _, h0c), (l1, _, l1c, _) in zip(ordered, ordered[1:]):
        if h0 != l1 or h0c == l1c:
            raise ValueError("bands must partition [0,1] without overlap")
    summaries = []
    by_key: dict[tuple[str, int], list[DailyMetrics]] = {}
    for m in daily:
        by_key.setdefault((m.site_id, m.day.year), []).append(m)
    for (site_id, year), rows in sorted(by_key.items()):
        for band in ordered:
            count = sum(1 for m in rows if _in_band(getattr(m, metric), band))
            summaries.append(
                ThresholdSummary(
                    site_id=site_id,
                    year=year,
                    metric=metric,
                    band_low=band[0],
                    band_high=band[1],
                    low_closed=band[2],
                    high_closed=band[3],
                    day_count=count,
                )
            )
    return summaries


def fleet_ratios(n_evs: int, n_chargers: int, total_power_kw: float) -> FleetRatios:
    if n_evs <= 0 or n_chargers <= 0:
        raise ValueError("n_evs and n_chargers must be positive")
    return FleetRatios(evcr=n_evs / n_chargers, evcp=total_power_kw / n_evs)


def load_holidays(stream: IO[str]) -> set[date]:
    """Holiday calendar: one ISO date per line; blank lines and '#' ignored."""
    holidays: set[date] = set()
    for line in stream:
        text = line.strip()
        if text and not text.startswith("#"):
            holidays.add(date.fromisoformat(text))
    return holidays


def write_daily_metrics_csv(daily: Sequence[DailyMetrics], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(
        [
            "site_id",
            "date",
            "category",
            "n_requests",
            "utilization",
            "occupancy",
            "idleness",
            "blocking",
            "n_delayed",
        ]
    )
    for m in daily:
        writer.writerow(
            [
                m.site_id,
                m.day.isoformat(),
                m.category.value,
                m.n_requests,
                f"{m.utilization:.6f}",
                f"{m.occupancy:.6f}",
                f"{m.idleness:.6f}",
                f"{m.blocking:.6f}",
                m.n_delayed,
            ]
        )


def _band_label(s: ThresholdSummary) -> str:
    lo = "[" if s.low_closed else "("
    hi = "]" if s.high_closed else ")"
    return f"{lo}{s.band_low:g},{s.band_high:g}{hi}"


def write_threshold_summary_csv(
    summaries: Sequence[ThresholdSummary], stream: IO[str]
) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["site_id", "year", "metric", "band", "day_count"])
    for s in summaries:
        writer.writerow([s.site_id, s.year, s.metric, _band_label(s), s.day_count])
