"""UTC timestamp handling.

Everything downstream of ingestion works with integer UTC epoch seconds;
RFC 3339 strings appear only at the edges (API payloads, JSON/CSV files).
"""

from __future__ import annotations

from datetime import datetime, timezone


def parse_rfc3339(value: str) -> int:
    """Parse an RFC 3339 timestamp ("Z" or numeric offset) to UTC epoch seconds."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ValueError(f"not an RFC 3339 timestamp: {value!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return round(dt.timestamp())


def format_utc(ts: int) -> str:
    """Render epoch seconds as an ISO-8601 UTC string with seconds precision."""
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def coerce_epoch(value: object) -> int:
    """Coerce a date cell (epoch number, RFC 3339 string, or datetime) to epoch seconds.

    Raises ValueError for anything unparseable; None is not accepted here,
    callers skip null cells before coercing.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return round(value)
    if isinstance(value, datetime):
        dt = value if value.tzinfo else value.replace(tzinfo=timezone.utc)
        return round(dt.timestamp())
    if isinstance(value, str):
        return parse_rfc3339(value)
    raise ValueError(f"not a timestamp: {value!r}")


def utc_parts(ts: int) -> tuple[int, int, int, int]:
    """Return (year, month, day, weekday) for epoch seconds; weekday 0 = Monday."""
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    return dt.year, dt.month, dt.day, dt.weekday()
