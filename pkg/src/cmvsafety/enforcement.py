"""Inspection and citation trend series from FMCSA and weigh-station data.

FMCSA records are statewide daily counts; weigh-station (VWS) records are
per-pass events supporting hourly buckets and class/weight filtering.
Ratios and percentages are kept raw here; display rounding (2 decimals
for ratios, 1 for percentages) happens only at serialization.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Mapping, Sequence

from .errors import EmptyScope, ValidationError
from .records import FmcsaCategory, FmcsaDailyRecord, VwsRecord, VwsViolationCategory
from .timeutil import DateRange

VWS_SERIES_HEADER = ["bucket", "total", "flagged", "speeding", "overweight",
                     "dimension", "other"]
FMCSA_SERIES_HEADER = ["date", "inspections", "oos", "pct_oos"]

# Gross-weight bins (lb): below 26k, 26k through 80k, above 80k.
WEIGHT_BINS: dict[str, tuple[float | None, float | None]] = {
    "lt26k": (None, 26_000.0),
    "26k_80k": (26_000.0, 80_000.0),
    "gt80k": (80_000.0, None),
}

# FHWA classes conventionally treated as commercial vehicles.
CMV_FHWA_CLASSES = frozenset(range(4, 14))


@dataclass(frozen=True)
class TrendPoint:
    """One series bucket; bucket_hour is None at daily granularity."""

    bucket_date: date
    bucket_hour: int | None
    total: int
    flagged: int
    by_category: Mapping[str, int]
    pct_flagged: float | None

    @property
    def bucket_label(self) -> str:
        if self.bucket_hour is None:
            return self.bucket_date.isoformat()
        return f"{self.bucket_date.isoformat()}T{self.bucket_hour:02d}"


def citations_per_inspection(citations: int, inspections: int) -> float | None:
    """Raw ratio; None when there are no inspections to divide by."""
    if citations < 0 or inspections < 0:
        raise ValidationError("counts must be >= 0")
    if inspections == 0:
        return None
    return citations / inspections


def round_ratio(value: float | None) -> float | None:
    return None if value is None else round(value, 2)


def round_pct(value: float | None) -> float | None:
    return None if value is None else round(value, 1)


def fmcsa_daily_series(
    records: Iterable[FmcsaDailyRecord], date_range: DateRange
) -> list[TrendPoint]:
    """One zero-filled point per day; flagged carries the OOS count."""
    by_day: dict[date, list[FmcsaDailyRecord]] = defaultdict(list)
    for r in records:
        if r.date in date_range:
            by_day[r.date].append(r)
    out = []
    for day in date_range.days():
        rows = by_day.get(day, [])
        inspections = sum(r.inspections for r in rows)
        oos = sum(r.oos_count for r in rows)
        by_category = {
            cat.value: sum(r.violations_by_category.get(cat, 0) for r in rows)
            for cat in FmcsaCategory
        }
        out.append(
            TrendPoint(
                bucket_date=day,
                bucket_hour=None,
                total=inspections,
                flagged=oos,
                by_category=by_category,
                pct_flagged=100.0 * oos / inspections if inspections > 0 else None,
            )
        )
    return out


def _weight_in_bin(weight: float, bin_name: str) -> bool:
    lo, hi = WEIGHT_BINS[bin_name]
    if lo is not None and weight < lo:
        return False
    if hi is not None:
        # Upper-bounded bins include their boundary; the open-ended bin
        # starts strictly above the previous boundary.
        if lo is None:
            return weight < hi
        return weight <= hi
    return weight > lo


def vws_series(
    records: Iterable[VwsRecord],
    station_ids: Iterable[str],
    date_range: DateRange,
    granularity: str = "daily",
    fhwa_classes: Iterable[int] | None = None,
    weight_bins: Iterable[str] | None = None,
) -> list[TrendPoint]:
    """Pass/flag counts per bucket for the selected stations.

    A pass is flagged when it carries at least one violation; each
    violation category tallies independently, so category counts can sum
    past the flagged count. Buckets with no passes appear as zeros.
    """
    stations = set(station_ids)
    if not stations:
        raise EmptyScope("vws_series requires at least one station")
    if granularity not in ("daily", "hourly"):
        raise ValidationError(f"granularity must be daily or hourly, got {granularity!r}")
    classes = set(fhwa_classes) if fhwa_classes is not None else None
    bins = list(weight_bins) if weight_bins is not None else None
    if bins is not None:
        for b in bins:
            if b not in WEIGHT_BINS:
                raise ValidationError(f"unknown weight bin {b!r}")

    buckets: dict[tuple[date, int | None], list[VwsRecord]] = defaultdict(list)
    for r in records:
        if r.station_id not in stations:
            continue
        day = r.timestamp.date()
        if day not in date_range:
            continue
        if classes is not None and r.fhwa_class not in classes:
            continue
        if bins is not None and not any(
            _weight_in_bin(r.gross_weight_lb, b) for b in bins
        ):
            continue
        key = (day, r.timestamp.hour if granularity == "hourly" else None)
        buckets[key].append(r)

    keys: list[tuple[date, int | None]] = []
    for day in date_range.days():
        if granularity == "hourly":
            keys.extend((day, h) for h in range(24))
        else:
            keys.append((day, None))

    out = []
    for key in keys:
        rows = buckets.get(key, [])
        flagged = sum(1 for r in rows if r.violations)
        by_category = {
            cat.value: sum(1 for r in rows if cat in r.violations)
            for cat in VwsViolationCategory
        }
        out.append(
            TrendPoint(
                bucket_date=key[0],
                bucket_hour=key[1],
                total=len(rows),
                flagged=flagged,
                by_category=by_category,
                pct_flagged=100.0 * flagged / len(rows) if rows else None,
            )
        )
    return out


def serialize_vws_series_csv(points: Sequence[TrendPoint]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(VWS_SERIES_HEADER)
    for p in points:
        w.writerow([
            p.bucket_label, p.total, p.flagged,
            p.by_category.get(VwsViolationCategory.SPEEDING.value, 0),
            p.by_category.get(VwsViolationCategory.OVERWEIGHT.value, 0),
            p.by_category.get(VwsViolationCategory.DIMENSION.value, 0),
            p.by_category.get(VwsViolationCategory.OTHER.value, 0),
        ])
    return out.getvalue()


def serialize_fmcsa_series_csv(points: Sequence[TrendPoint]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(FMCSA_SERIES_HEADER)
    for p in points:
        pct = round_pct(p.pct_flagged)
        w.writerow([
            p.bucket_date.isoformat(), p.total, p.flagged,
            "" if pct is None else f"{pct:.1f}",
        ])
    return out.getvalue()
