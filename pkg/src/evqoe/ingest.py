"""Session CSV parsing, cleaning, merge of resumed sessions, site clustering,
and per-site minute-resolution occupancy timelines."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import SchemaError

SESSION_COLUMNS = [
    "session_id",
    "outlet_id",
    "station_id",
    "postal_code",
    "start_time",
    "end_time",
    "energy_kwh",
    "payment",
    "account_id",
]

TIMESTAMP_FMT = "%Y-%m-%dT%H:%M:%SZ"

SLOT_SECONDS = 60


@dataclass(frozen=True)
class SessionRecord:
    session_id: str
    outlet_id: str
    station_id: str
    postal_code: str
    start_time: datetime
    end_time: datetime
    energy_kwh: float
    payment: float | None
    account_id: str

    @property
    def duration(self) -> timedelta:
        return self.end_time - self.start_time


class RejectReason(Enum):
    MALFORMED = "Malformed"
    NEGATIVE_DURATION = "NegativeDuration"
    TOO_SHORT = "TooShort"
    TOO_LONG = "TooLong"
    NO_PAYMENT = "NoPayment"
    NO_ENERGY = "NoEnergy"


@dataclass(frozen=True)
class RejectedRecord:
    raw: dict[str, str]
    reason: RejectReason
    record: SessionRecord | None = None


@dataclass(frozen=True)
class CleaningRules:
    min_duration: timedelta = timedelta(minutes=3)
    max_duration: timedelta = timedelta(hours=2)
    require_payment: bool = True
    require_energy: bool = True
    merge_gap: timedelta = timedelta(seconds=60)

    def __post_init__(self) -> None:
        if self.min_duration >= self.max_duration:
            raise ValueError("min_duration must be < max_duration")
        if self.merge_gap >= self.min_duration:
            raise ValueError("merge_gap must be < min_duration")


@dataclass(frozen=True)
class Site:
    site_id: str
    postal_code: str
    station_ids: frozenset[str]
    num_chargers: int
    charger_levels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.num_chargers < 1:
            raise ValueError("num_chargers must be >= 1")


@dataclass
class OccupancyTimeline:
    """Per-minute occupied-charger counts for one site over a window."""

    site_id: str
    window_start: datetime
    counts: np.ndarray  # int array, one entry per minute slot
    num_chargers: int
    cap_warnings: int = 0  # slots where raw concurrency exceeded num_chargers

    def __len__(self) -> int:
        return len(self.counts)


def parse_timestamp(text: str) -> datetime:
    return datetime.strptime(text, TIMESTAMP_FMT).replace(tzinfo=timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime(TIMESTAMP_FMT)


def _row_to_record(row: dict[str, str]) -> SessionRecord:
    payment_text = (row["payment"] or "").strip()
    return SessionRecord(
        session_id=row["session_id"],
        outlet_id=row["outlet_id"],
        station_id=row["station_id"],
        postal_code=row["postal_code"].strip(),
        start_time=parse_timestamp(row["start_time"]),
        end_time=parse_timestamp(row["end_time"]),
        energy_kwh=float(row["energy_kwh"]),
        payment=float(payment_text) if payment_text else None,
        account_id=row["account_id"],
    )


def parse_sessions(
    stream: IO[str],
) -> tuple[list[SessionRecord], list[RejectedRecord]]:
    """Parse the session CSV, keeping input order.

    Malformed rows (bad numbers/timestamps, missing fields) become
    RejectedRecord(Malformed); a missing header column is a fatal SchemaError.
    Lines starting with '#' (provenance headers) are skipped.
    """
    lines = (line for line in stream if not line.startswith("#"))
    reader = csv.DictReader(lines)
    if reader.fieldnames is None:
        raise SchemaError("input CSV is empty (no header)")
    missing = [c for c in SESSION_COLUMNS if c not in reader.fieldnames]
    if missing:
        raise SchemaError(f"missing column(s): {', '.join(missing)}")

    records: list[SessionRecord] = []
    rejected: list[RejectedRecord] = []
    for row in reader:
        try:
            records.append(_row_to_record(row))
        except (ValueError, TypeError, KeyError):
            rejected.append(RejectedRecord(raw=dict(row), reason=RejectReason.MALFORMED))
    return records, rejected


def record_to_row(record: SessionRecord) -> dict[str, str]:
    return {
        "session_id": record.session_id,
        "outlet_id": record.outlet_id,
        "station_id": record.station_id,
        "postal_code": record.postal_code,
        "start_time": format_timestamp(record.start_time),
        "end_time": format_timestamp(record.end_time),
        "energy_kwh": repr(float(record.energy_kwh)),
        "payment": "" if record.payment is None else repr(float(record.payment)),
        "account_id": record.account_id,
    }


def _first_failing_rule(record: SessionRecord, rules: CleaningRules) -> RejectReason | None:
    duration = record.duration
    if duration < timedelta(0):
        return RejectReason.NEGATIVE_DURATION
    if duration < rules.min_duration:
        return RejectReason.TOO_SHORT
    if duration > rules.max_duration:
        return RejectReason.TOO_LONG
    if rules.require_payment and not (record.payment is not None and record.payment > 0):
        return RejectReason.NO_PAYMENT
    if rules.require_energy and not record.energy_kwh > 0:
        return RejectReason.NO_ENERGY
    return None


def clean_sessions(
    records: Iterable[SessionRecord], rules: CleaningRules
) -> tuple[list[SessionRecord], list[RejectedRecord]]:
    """Apply the validity rules; each rejection carries the first failing rule."""
    valid: list[SessionRecord] = []
    rejected: list[RejectedRecord] = []
    for record in records:
        reason = _first_failing_rule(record, rules)
        if reason is None:
            valid.append(record)
        else:
            rejected.append(
                RejectedRecord(raw=record_to_row(record), reason=reason, record=record)
            )
    return valid, rejected


def merge_resumed_sessions(
    records: Iterable[SessionRecord], rules: CleaningRules
) -> list[SessionRecord]:
    """Coalesce stop-and-resume sessions of one account at one site.

    Consecutive sessions of the same account on the same site whose gap
    (next start minus previous end) is at most merge_gap become a single
    record: span of both, energy and payment summed. The merge is
    transitive along a chain. Output is sorted by (site, account, start).
    """
    ordered = sorted(records, key=lambda r: (r.postal_code, r.account_id, r.start_time))
    merged: list[SessionRecord] = []
    for record in ordered:
        if merged:
            prev = merged[-1]
            same_group = (
                prev.postal_code == record.postal_code
                and prev.account_id == record.account_id
            )
            if same_group and record.start_time - prev.end_time <= rules.merge_gap:
                payment: float | None
                if prev.payment is None and record.payment is None:
                    payment = None
                else:
                    payment = (prev.payment or 0.0) + (record.payment or 0.0)
                merged[-1] = replace(
                    prev,
                    end_time=max(prev.end_time, record.end_time),
                    energy_kwh=prev.energy_kwh + record.energy_kwh,
                    payment=payment,
                )
                continue
        merged.append(record)
    return merged


def load_site_manifest(stream: IO[str]) -> dict[str, tuple[int, tuple[str, ...]]]:
    """Read the optional manifest: postal_code -> (num_chargers, levels)."""
    reader = csv.DictReader(line for line in stream if not line.startswith("#"))
    required = {"postal_code", "num_chargers", "levels"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise SchemaError("manifest must have columns postal_code,num_chargers,levels")
    manifest: dict[str, tuple[int, tuple[str, ...]]] = {}
    for row in reader:
        levels = tuple(l for l in (row.get("levels") or "").split(";") if l)
        manifest[row["postal_code"]] = (int(row["num_chargers"]), levels)
    return manifest


def cluster_sites(
    records: Iterable[SessionRecord],
    manifest: dict[str, tuple[int, tuple[str, ...]]] | None = None,
) -> tuple[dict[str, Site], list[RejectedRecord]]:
    """Group stations into sites by postal code.

    num_chargers is the count of distinct outlets observed, unless the
    manifest declares a value for the postal code (manifest wins).
    Records with an empty postal code are rejected as Malformed.
    """
    outlets: dict[str, set[str]] = {}
    stations: dict[str, set[str]] = {}
    rejected: list[RejectedRecord] = []
    for record in records:
        if not record.postal_code:
            rejected.append(
                RejectedRecord(
                    raw=record_to_row(record),
                    reason=RejectReason.MALFORMED,
                    record=record,
                )
            )
            continue
        outlets.setdefault(record.postal_code, set()).add(record.outlet_id)
        stations.setdefault(record.postal_code, set()).add(record.station_id)

    manifest = manifest or {}
    sites: dict[str, Site] = {}
    for postal_code in sorted(outlets):
        declared = manifest.get(postal_code)
        if declared is not None:
            num_chargers, levels = declared
        else:
            num_chargers, levels = len(outlets[postal_code]), ()
        sites[postal_code] = Site(
            site_id=postal_code,
            postal_code=postal_code,
            station_ids=frozenset(stations[postal_code]),
            num_chargers=num_chargers,
            charger_levels=levels,
        )
    return sites, rejected


def build_occupancy_timeline(
    site: Site,
    sessions: Iterable[SessionRecord],
    window_start: datetime,
    window_end: datetime,
) -> OccupancyTimeline:
    """Rasterize sessions into per-minute occupied counts.

    A slot counts as occupied by a session when the session overlaps it by
    any positive amount. Counts are capped at the site's charger count;
    slots where raw concurrency exceeded it are tallied in cap_warnings.
    """
    if window_end <= window_start:
        raise ValueError("window end must be after window start")
    total_seconds = (window_end - window_start).total_seconds()
    if total_seconds % SLOT_SECONDS:
        raise ValueError("window must be aligned to whole minutes")
    n_slots = int(total_seconds) // SLOT_SECONDS

    deltas = np.zeros(n_slots + 1, dtype=np.int64)
    for session in sessions:
        start_off = (session.start_time - window_start).total_seconds()
        end_off = (session.end_time - window_start).total_seconds()
        if end_off <= start_off:
            continue
        first = int(np.floor(start_off / SLOT_SECONDS))
        last = int(np.ceil(end_off / SLOT_SECONDS))  # exclusive
        first = max(first, 0)
        last = min(last, n_slots)
        if first < last:
            deltas[first] += 1
            deltas[last] -= 1
    counts = np.cumsum(deltas[:-1])
    over = counts > site.num_chargers
    cap_warnings = int(np.count_nonzero(over))
    counts = np.minimum(counts, site.num_chargers)
    return OccupancyTimeline(
        site_id=site.site_id,
        window_start=window_start,
        counts=counts,
        num_chargers=site.num_chargers,
        cap_warnings=cap_warnings,
    )


def write_sessions_csv(records: Sequence[SessionRecord], stream: IO[str]) -> None:
    writer = csv.DictWriter(stream, fieldnames=SESSION_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow(record_to_row(record))


def write_rejections_csv(rejections: Sequence[RejectedRecord], stream: IO[str]) -> None:
    writer = csv.DictWriter(
        stream, fieldnames=SESSION_COLUMNS + ["reason"], lineterminator="\n", extrasaction="ignore"
    )
    writer.writeheader()
    for rejection in rejections:
        row = dict(rejection.raw)
        row["reason"] = rejection.reason.value
        writer.writerow(row)
