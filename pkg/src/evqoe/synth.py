"""Synthetic multi-site charging-session generator with known ground truth:
seasonal Poisson arrivals, growth trend, optional pandemic-style demand gap,
Erlang service law, and a matching EV/EVCS registry."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from typing import IO, Sequence

import numpy as np

from .ingest import SessionRecord

NOMINAL_POWER_KW = 7.0
FLAT_TARIFF_PER_KWH = 0.15
MAX_OUTLET_DELAY_MIN = 360.0
DURATION_CLAMP_MIN = (3.0, 120.0)


@dataclass(frozen=True)
class SynthSite:
    site_id: str
    postal_code: str
    num_chargers: int
    base_rate: float                 # expected arrivals per day, pre-modulation
    weekday_profile: tuple = (1.0,) * 7  # multiplicative, normalized to mean 1
    annual_amplitude: float = 0.0
    growth_per_year: float = 0.0
    service_shape_k: int = 3
    service_rate: float = 0.1        # per minute


@dataclass(frozen=True)
class SynthGap:
    start: date
    end: date                        # inclusive
    suppression: float = 0.6         # fraction of demand removed in the gap

    def __post_init__(self) -> None:
        if not 0.0 <= self.suppression <= 1.0:
            raise ValueError("suppression must be in [0, 1]")


@dataclass(frozen=True)
class RegionGrowth:
    code: str = "R1"
    initial_evs: int = 1000
    evs_per_month: int = 50
    initial_evcs: int = 100
    evcs_per_month: int = 5


@dataclass(frozen=True)
class SynthConfig:
    sites: tuple[SynthSite, ...]
    start_date: date
    end_date: date                   # exclusive
    gap: SynthGap | None = None
    regions: tuple[RegionGrowth, ...] = (RegionGrowth(),)
    seed: int = 0


@dataclass
class GroundTruth:
    daily_rates: dict[str, list[float]]          # site_id -> expected arrivals/day
    service: dict[str, dict[str, float]]         # site_id -> shape/rate
    dropped_arrivals: dict[str, int]
    start_date: date

    def as_dict(self) -> dict:
        return {
            "start_date": self.start_date.isoformat(),
            "daily_rates": self.daily_rates,
            "service": self.service,
            "dropped_arrivals": self.dropped_arrivals,
        }


def expected_daily_rate(site: SynthSite, day: date, start: date, gap: SynthGap | None) -> float:
    years = (day - start).days / 365.25
    doy = day.timetuple().tm_yday
    profile = np.asarray(site.weekday_profile, dtype=float)
    profile = profile * 7.0 / profile.sum()
    rate = (
        site.base_rate
        * (1.0 + site.growth_per_year * years)
        * (1.0 + site.annual_amplitude * np.sin(2.0 * np.pi * doy / 365.0))
        * profile[day.weekday()]
    )
    if gap is not None and gap.start <= day <= gap.end:
        rate *= 1.0 - gap.suppression
    return max(rate, 0.0)


def _generate_site(
    site: SynthSite, config: SynthConfig, rng: np.random.Generator
) -> tuple[list[SessionRecord], list[float], int]:
    records: list[SessionRecord] = []
    rates: list[float] = []
    dropped = 0
    outlet_free = np.zeros(site.num_chargers)  # minutes since window start
    origin = datetime.combine(config.start_date, time(0), tzinfo=timezone.utc)
    n_days = (config.end_date - config.start_date).days
    seq = 0
    lo, hi = DURATION_CLAMP_MIN
    for day_idx in range(n_days):
        day = config.start_date + timedelta(days=day_idx)
        lam = expected_daily_rate(site, day, config.start_date, config.gap)
        rates.append(lam)
        count = int(rng.poisson(lam))
        if count == 0:
            continue
        offsets = np.sort(rng.uniform(0.0, 1440.0, count))
        durations = np.clip(
            rng.gamma(site.service_shape_k, 1.0 / site.service_rate, count), lo, hi
        )
        day_base = day_idx * 1440.0
        for offset, duration in zip(offsets, durations):
            arrival = day_base + offset
            outlet = int(np.argmin(outlet_free))
            start_min = max(arrival, outlet_free[outlet])
            if start_min - arrival > MAX_OUTLET_DELAY_MIN:
                dropped += 1
                continue
            end_min = start_min + duration
            outlet_free[outlet] = end_min
            energy = float(duration) / 60.0 * NOMINAL_POWER_KW
            seq += 1
            records.append(
                SessionRecord(
                    session_id=f"{site.site_id}-{seq:07d}",
                    outlet_id=f"{site.site_id}-o{outlet:02d}",
                    station_id=f"{site.site_id}-st{outlet // 2:02d}",
                    postal_code=site.postal_code,
                    start_time=origin + timedelta(seconds=round(start_min * 60.0)),
                    end_time=origin + timedelta(seconds=round(end_min * 60.0)),
                    energy_kwh=round(energy, 3),
                    payment=round(energy * FLAT_TARIFF_PER_KWH, 2),
                    account_id=f"acct-{rng.integers(10**8):08d}",
                )
            )
    return records, rates, dropped


def generate_sessions(config: SynthConfig) -> tuple[list[SessionRecord], GroundTruth]:
    """Generate session records (sorted by start time) plus ground truth.

    Arrivals queue for outlets inside the generator, so concurrency never
    exceeds the charger count; arrivals that would wait more than 6 hours
    are dropped and tallied.
    """
    seeds = np.random.SeedSequence(config.seed).spawn(len(config.sites))
    truth = GroundTruth(
        daily_rates={}, service={}, dropped_arrivals={}, start_date=config.start_date
    )
    all_records: list[SessionRecord] = []
    for site, seed in zip(config.sites, seeds):
        records, rates, dropped = _generate_site(site, config, np.random.default_rng(seed))
        all_records.extend(records)
        truth.daily_rates[site.site_id] = rates
        truth.service[site.site_id] = {
            "shape_k": site.service_shape_k,
            "rate": site.service_rate,
        }
        truth.dropped_arrivals[site.site_id] = dropped
    all_records.sort(key=lambda r: (r.start_time, r.session_id))
    return all_records, truth


def registry_rows(config: SynthConfig) -> list[tuple[date, str, str, int]]:
    """Monthly step rows (date, scope, metric, value); province rows are
    the sum of the regions at each step."""
    rows: list[tuple[date, str, str, int]] = []
    month_starts: list[date] = []
    day = config.start_date.replace(day=1)
    while day < config.end_date:
        month_starts.append(day)
        day = (day.replace(day=28) + timedelta(days=4)).replace(day=1)
    for i, month in enumerate(month_starts):
        province = {"evs": 0, "evcs": 0}
        for region in config.regions:
            evs = region.initial_evs + region.evs_per_month * i
            evcs = region.initial_evcs + region.evcs_per_month * i
            rows.append((month, f"region:{region.code}", "evs", evs))
            rows.append((month, f"region:{region.code}", "evcs", evcs))
            province["evs"] += evs
            province["evcs"] += evcs
        rows.append((month, "province", "evs", province["evs"]))
        rows.append((month, "province", "evcs", province["evcs"]))
    return rows


def write_registry_csv(rows: Sequence[tuple[date, str, str, int]], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["date", "scope", "metric", "value"])
    for day, scope, metric, value in rows:
        writer.writerow([day.isoformat(), scope, metric, value])
