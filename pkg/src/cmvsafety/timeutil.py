"""Timestamp and date-range helpers.

All wire timestamps are RFC 3339 UTC. Python 3.10's fromisoformat does not
accept a trailing "Z", so parsing normalizes it to "+00:00" first.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import Iterator

DOW_TOKENS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
_DOW_INDEX = {tok: i for i, tok in enumerate(DOW_TOKENS)}


def parse_rfc3339(text: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime."""
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no timezone")
    return dt.astimezone(timezone.utc)


def format_rfc3339(dt: datetime) -> str:
    if dt.tzinfo is None:
        raise ValueError("naive datetime")
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_date(text: str) -> date:
    return date.fromisoformat(text.strip())


def dow_token(day_index: int) -> str:
    return DOW_TOKENS[day_index]


def dow_index(token: str) -> int:
    try:
        return _DOW_INDEX[token.strip().capitalize()[:3]]
    except KeyError:
        raise ValueError(f"unknown day-of-week token {token!r}") from None


@dataclass(frozen=True, order=True)
class DateRange:
    """Inclusive calendar-day range."""

    start: date
    end: date

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise ValueError(f"empty date range {self.start}..{self.end}")

    @property
    def n_days(self) -> int:
        return (self.end - self.start).days + 1

    def __contains__(self, d: date) -> bool:
        return self.start <= d <= self.end

    def days(self) -> Iterator[date]:
        d = self.start
        while d <= self.end:
            yield d
            d += timedelta(days=1)

    def overlaps(self, other: "DateRange") -> bool:
        return self.start <= other.end and other.start <= self.end
