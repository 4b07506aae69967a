from datetime import datetime, timedelta, timezone

import pytest

from evqoe.ingest import SessionRecord


def ts(text: str) -> datetime:
    """Shorthand UTC timestamp: 'YYYY-MM-DD HH:MM' or with seconds."""
    fmt = "%Y-%m-%d %H:%M:%S" if text.count(":") == 2 else "%Y-%m-%d %H:%M"
    return datetime.strptime(text, fmt).replace(tzinfo=timezone.utc)


def make_session(
    start,
    end=None,
    duration_min: float = 30.0,
    session_id: str = "s1",
    outlet_id: str = "o1",
    station_id: str = "st1",
    postal_code: str = "H1A1A1",
    energy_kwh: float = 5.0,
    payment: float | None = 2.0,
    account_id: str = "acct1",
) -> SessionRecord:
    if isinstance(start, str):
        start = ts(start)
    if end is None:
        end = start + timedelta(minutes=duration_min)
    elif isinstance(end, str):
        end = ts(end)
    return SessionRecord(
        session_id=session_id,
        outlet_id=outlet_id,
        station_id=station_id,
        postal_code=postal_code,
        start_time=start,
        end_time=end,
        energy_kwh=energy_kwh,
        payment=payment,
        account_id=account_id,
    )


@pytest.fixture
def session_factory():
    return make_session
