"""Temporal filtering shared by metrics, comparison, and the API.

A filter dimension set to None means "all"; a provided set must be
non-empty. Query-string forms accept comma lists and inclusive ranges
("6-14" means hours 6 through 14).
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime

from .errors import ValidationError
from .timeutil import dow_index


def _check_dim(name: str, values: frozenset | None, lo: int, hi: int) -> None:
    if values is None:
        return
    if not values:
        raise ValidationError(f"{name}: empty selection is invalid")
    for v in values:
        if not lo <= v <= hi:
            raise ValidationError(f"{name}: {v} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class TemporalFilter:
    """Year/month/ISO-week/day-of-week/hour selection; None = all."""

    years: frozenset[int] | None = None
    months: frozenset[int] | None = None
    iso_weeks: frozenset[int] | None = None
    days_of_week: frozenset[int] | None = None  # 0=Mon .. 6=Sun
    hours: frozenset[int] | None = None  # 0..23

    def __post_init__(self) -> None:
        _check_dim("years", self.years, 1, 9999)
        _check_dim("months", self.months, 1, 12)
        _check_dim("iso_weeks", self.iso_weeks, 1, 53)
        _check_dim("days_of_week", self.days_of_week, 0, 6)
        _check_dim("hours", self.hours, 0, 23)

    def matches_date(self, d: date) -> bool:
        """Date-level dimensions only; the hour dimension is ignored."""
        if self.years is not None and d.year not in self.years:
            return False
        if self.months is not None and d.month not in self.months:
            return False
        if self.iso_weeks is not None and d.isocalendar()[1] not in self.iso_weeks:
            return False
        if self.days_of_week is not None and d.weekday() not in self.days_of_week:
            return False
        return True

    def matches(self, d: date, hour: int) -> bool:
        if self.hours is not None and hour not in self.hours:
            return False
        return self.matches_date(d)

    def matches_dt(self, dt: datetime) -> bool:
        return self.matches(dt.date(), dt.hour)

    @property
    def restricts_hours(self) -> bool:
        return self.hours is not None


def parse_int_set(text: str | None, name: str = "value") -> frozenset[int] | None:
    """Parse "2023,2024" or "6-14" or a mix; None/"" / "all" mean all."""
    if text is None or text == "" or text.lower() == "all":
        return None
    values: set[int] = set()
    for token in text.split(","):
        token = token.strip()
        if not token:
            raise ValidationError(f"{name}: empty token")
        if "-" in token[1:]:  # allow negative-looking first char to fail int()
            lo_s, _, hi_s = token.partition("-")
            try:
                lo, hi = int(lo_s), int(hi_s)
            except ValueError:
                raise ValidationError(f"{name}: bad range {token!r}") from None
            if hi < lo:
                raise ValidationError(f"{name}: descending range {token!r}")
            values.update(range(lo, hi + 1))
        else:
            try:
                values.add(int(token))
            except ValueError:
                raise ValidationError(f"{name}: bad integer {token!r}") from None
    return frozenset(values)


def parse_dow_set(text: str | None) -> frozenset[int] | None:
    """Parse "Tue,Wed" into weekday indices; None/""/"all" mean all."""
    if text is None or text == "" or text.lower() == "all":
        return None
    values: set[int] = set()
    for token in text.split(","):
        try:
            values.add(dow_index(token.strip()))
        except (KeyError, ValueError):
            raise ValidationError(f"days_of_week: unknown token {token!r}") from None
    return frozenset(values)


def filter_from_params(
    years: str | None = None,
    months: str | None = None,
    weeks: str | None = None,
    dows: str | None = None,
    hours: str | None = None,
) -> TemporalFilter:
    return TemporalFilter(
        years=parse_int_set(years, "years"),
        months=parse_int_set(months, "months"),
        iso_weeks=parse_int_set(weeks, "weeks"),
        days_of_week=parse_dow_set(dows),
        hours=parse_int_set(hours, "hours"),
    )


def coerce_int_set(raw: object, name: str) -> frozenset[int] | None:
    """JSON-friendly variant: accepts None, "6-14" strings, or int lists."""
    if raw is None:
        return None
    if isinstance(raw, str):
        return parse_int_set(raw, name)
    if isinstance(raw, list) and all(isinstance(v, int) for v in raw):
        return parse_int_set(",".join(str(v) for v in raw), name)
    raise ValidationError(f"{name} must be a string or integer list")


def coerce_dow_set(raw: object) -> frozenset[int] | None:
    """JSON-friendly variant: accepts None, "Tue,Wed" strings, or token lists."""
    if raw is None:
        return None
    if isinstance(raw, str):
        return parse_dow_set(raw)
    if isinstance(raw, list) and all(isinstance(v, str) for v in raw):
        return parse_dow_set(",".join(raw))
    raise ValidationError("dows must be a string or token list")
