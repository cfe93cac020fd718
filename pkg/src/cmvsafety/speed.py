"""Per-segment speed performance measures.

Hourly aggregation from 5-minute probe epochs, nighttime reference
speeds, over-speeding shares, travel time, historical averages, and
missing-data rates. All operations are pure and order-independent.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import EmptyScope, MalformedHeader, RowError, ZeroSpeed
from .network import SegmentGraph
from .records import ProbeSpeedRecord, VehicleClass
from .timeutil import DateRange

# Local clock hours counted as nighttime (22:00 through 04:59).
NIGHT_HOURS = frozenset({22, 23, 0, 1, 2, 3, 4})
REFERENCE_PERCENTILE = 0.95

AGGREGATES_HEADER = [
    "segment_id", "date", "hour", "vehicle_class", "mean_speed_mph",
    "harmonic_speed_mph", "min_speed_mph", "max_speed_mph", "epochs_observed",
    "pct_over_limit", "pct_over_limit_uncongested",
]


@dataclass(frozen=True)
class HourlyAggregate:
    """One (segment, date, hour, class) cell; percent fields may be undefined."""

    segment_id: str
    date: date
    hour: int
    vehicle_class: VehicleClass
    mean_speed_mph: float
    harmonic_speed_mph: float
    min_speed_mph: float
    max_speed_mph: float
    epochs_observed: int
    pct_over_limit: float | None = None
    pct_over_limit_uncongested: float | None = None


@dataclass(frozen=True)
class ReferenceSpeed:
    """95th-percentile nighttime speed for one segment and class."""

    segment_id: str
    vehicle_class: VehicleClass
    value_mph: float
    n_night_samples: int


def harmonic_mean(speeds: Sequence[float]) -> float:
    if not speeds:
        raise ValueError("harmonic mean of empty sequence")
    if any(v <= 0 for v in speeds):
        raise ZeroSpeed("harmonic mean requires positive speeds")
    return len(speeds) / sum(1.0 / v for v in speeds)


def percentile_linear(values: Sequence[float], p: float) -> float:
    """Percentile with linear interpolation at rank (n-1)*p."""
    if not values:
        raise ValueError("percentile of empty sequence")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    s = sorted(values)
    rank = (len(s) - 1) * p
    lo = math.floor(rank)
    hi = math.ceil(rank)
    if lo == hi:
        return s[lo]
    frac = rank - lo
    return s[lo] + frac * (s[hi] - s[lo])


def pct_over_limit(epoch_speeds: Sequence[float], limit_mph: float | None) -> float | None:
    """Share of epochs above the posted limit; None without epochs or limit."""
    if limit_mph is None or not epoch_speeds:
        return None
    over = sum(1 for v in epoch_speeds if v > limit_mph)
    return 100.0 * over / len(epoch_speeds)


def pct_over_limit_uncongested(
    epoch_speeds: Sequence[float],
    limit_mph: float | None,
    reference_mph: float | None,
) -> float | None:
    """Over-limit epochs as a share of uncongested epochs.

    Uncongested means speed above 0.8x the reference speed. The ratio can
    exceed 100 when the limit sits below that threshold; it is reported
    as computed. None when limit or reference is unknown or the
    uncongested count is zero.
    """
    if limit_mph is None or reference_mph is None:
        return None
    if reference_mph <= 0:
        raise ValueError("reference_mph must be > 0")
    uncongested = sum(1 for v in epoch_speeds if v > 0.8 * reference_mph)
    if uncongested == 0:
        return None
    over = sum(1 for v in epoch_speeds if v > limit_mph)
    return 100.0 * over / uncongested


def travel_time_minutes(length_miles: float, harmonic_speed_mph: float) -> float:
    if harmonic_speed_mph <= 0:
        raise ZeroSpeed("harmonic speed must be > 0")
    return 60.0 * length_miles / harmonic_speed_mph


def compute_reference_speed(
    records: Iterable[ProbeSpeedRecord],
    segment_id: str,
    vehicle_class: VehicleClass,
    local_utc_offset_hours: int = 0,
) -> ReferenceSpeed | None:
    """Nighttime 95th-percentile speed; None when no nighttime samples.

    Nighttime is judged on the local clock; epochs are stored UTC, so an
    offset shifts the hour before the window test.
    """
    night_speeds = [
        r.speed_mph
        for r in records
        if r.segment_id == segment_id
        and r.vehicle_class == vehicle_class
        and (r.epoch_start.hour + local_utc_offset_hours) % 24 in NIGHT_HOURS
    ]
    if not night_speeds:
        return None
    value = percentile_linear(night_speeds, REFERENCE_PERCENTILE)
    return ReferenceSpeed(segment_id, vehicle_class, value, len(night_speeds))


def compute_all_reference_speeds(
    records: Sequence[ProbeSpeedRecord],
    local_utc_offset_hours: int = 0,
) -> dict[tuple[str, VehicleClass], ReferenceSpeed]:
    """Reference speeds for every (segment, class) with nighttime data."""
    night: dict[tuple[str, VehicleClass], list[float]] = defaultdict(list)
    for r in records:
        if (r.epoch_start.hour + local_utc_offset_hours) % 24 in NIGHT_HOURS:
            night[(r.segment_id, r.vehicle_class)].append(r.speed_mph)
    return {
        key: ReferenceSpeed(
            key[0], key[1], percentile_linear(speeds, REFERENCE_PERCENTILE), len(speeds)
        )
        for key, speeds in night.items()
    }


def aggregate_hourly(
    records: Iterable[ProbeSpeedRecord],
    graph: SegmentGraph | None = None,
    reference_speeds: Mapping[tuple[str, VehicleClass], ReferenceSpeed] | None = None,
) -> list[HourlyAggregate]:
    """Group epochs into (segment, date, hour, class) cells.

    Percent fields are filled only when the graph supplies a posted limit
    (and, for the uncongested variant, a reference speed is known).
    Output order is by key, so any permutation of the input yields an
    identical list.
    """
    cells: dict[tuple[str, date, int, VehicleClass], list[ProbeSpeedRecord]] = (
        defaultdict(list)
    )
    for r in records:
        key = (r.segment_id, r.epoch_start.date(), r.epoch_start.hour, r.vehicle_class)
        cells[key].append(r)
    out: list[HourlyAggregate] = []
    for key in sorted(cells, key=lambda k: (k[0], k[1], k[2], k[3].value)):
        segment_id, day, hour, vclass = key
        rows = cells[key]
        # Sorted so float summation is independent of input order.
        speeds = sorted(r.speed_mph for r in rows)
        limit = None
        if graph is not None and segment_id in graph:
            limit = graph.speed_limit(segment_id)
        reference = None
        if reference_speeds is not None:
            ref = reference_speeds.get((segment_id, vclass))
            reference = ref.value_mph if ref is not None else None
        out.append(
            HourlyAggregate(
                segment_id=segment_id,
                date=day,
                hour=hour,
                vehicle_class=vclass,
                mean_speed_mph=sum(speeds) / len(speeds),
                harmonic_speed_mph=harmonic_mean(speeds),
                min_speed_mph=min(speeds),
                max_speed_mph=max(speeds),
                epochs_observed=len({r.epoch_start for r in rows}),
                pct_over_limit=pct_over_limit(speeds, limit),
                pct_over_limit_uncongested=pct_over_limit_uncongested(
                    speeds, limit, reference
                ),
            )
        )
    return out


def historical_average_speed(
    aggregates: Iterable[HourlyAggregate],
    segment_id: str,
    hour: int,
    day_of_week: int,
    vehicle_class: VehicleClass | None = None,
) -> float | None:
    """Mean of hourly mean speeds across dates sharing (hour, weekday)."""
    values = [
        a.mean_speed_mph
        for a in aggregates
        if a.segment_id == segment_id
        and a.hour == hour
        and a.date.weekday() == day_of_week
        and (vehicle_class is None or a.vehicle_class == vehicle_class)
    ]
    if not values:
        return None
    return sum(values) / len(values)


def missing_rate(
    aggregates: Iterable[HourlyAggregate],
    segment_ids: Iterable[str],
    date_range: DateRange,
    vehicle_class: VehicleClass,
) -> float:
    """Percent of expected segment-hours with no observed epochs.

    Expected is |segments| * |days| * 24; observed counts distinct
    (segment, date, hour) cells for the class.
    """
    segments = set(segment_ids)
    if not segments:
        raise EmptyScope("missing_rate requires at least one segment")
    expected = len(segments) * date_range.n_days * 24
    observed = {
        (a.segment_id, a.date, a.hour)
        for a in aggregates
        if a.vehicle_class == vehicle_class
        and a.segment_id in segments
        and a.date in date_range
    }
    return 100.0 * (expected - len(observed)) / expected


# ---------------------------------------------------------------- persistence


def _opt(text: str) -> float | None:
    return None if text == "" else float(text)


def serialize_aggregates_csv(aggregates: Sequence[HourlyAggregate]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(AGGREGATES_HEADER)
    for a in aggregates:
        w.writerow([
            a.segment_id, a.date.isoformat(), a.hour, a.vehicle_class.value,
            repr(a.mean_speed_mph), repr(a.harmonic_speed_mph),
            repr(a.min_speed_mph), repr(a.max_speed_mph), a.epochs_observed,
            repr(a.pct_over_limit) if a.pct_over_limit is not None else "",
            repr(a.pct_over_limit_uncongested)
            if a.pct_over_limit_uncongested is not None else "",
        ])
    return out.getvalue()


def parse_aggregates_csv(stream) -> list[HourlyAggregate]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedHeader(",".join(AGGREGATES_HEADER), "") from None
    if header != AGGREGATES_HEADER:
        raise MalformedHeader(",".join(AGGREGATES_HEADER), ",".join(header))
    out = []
    for f in reader:
        if not f:
            continue
        if len(f) != len(AGGREGATES_HEADER):
            raise RowError(reader.line_num, "wrong_field_count", "aggregates row")
        out.append(
            HourlyAggregate(
                segment_id=f[0],
                date=date.fromisoformat(f[1]),
                hour=int(f[2]),
                vehicle_class=VehicleClass(f[3]),
                mean_speed_mph=float(f[4]),
                harmonic_speed_mph=float(f[5]),
                min_speed_mph=float(f[6]),
                max_speed_mph=float(f[7]),
                epochs_observed=int(f[8]),
                pct_over_limit=_opt(f[9]),
                pct_over_limit_uncongested=_opt(f[10]),
            )
        )
    return out


def write_aggregates_dir(aggregates: Sequence[HourlyAggregate], out_dir: str | Path) -> None:
    """Persist aggregates partitioned into one CSV per date."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    by_date: dict[date, list[HourlyAggregate]] = defaultdict(list)
    for a in aggregates:
        by_date[a.date].append(a)
    for day, rows in by_date.items():
        (root / f"{day.isoformat()}.csv").write_text(
            serialize_aggregates_csv(rows), encoding="utf-8"
        )


def load_aggregates_dir(in_dir: str | Path) -> list[HourlyAggregate]:
    root = Path(in_dir)
    out: list[HourlyAggregate] = []
    for path in sorted(root.glob("*.csv")):
        with path.open(newline="", encoding="utf-8") as fh:
            out.extend(parse_aggregates_csv(fh))
    return out
