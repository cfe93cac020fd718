"""CSV parsers and serializers for every input dataset.

Each parser consumes a text stream whose first line must be the exact
documented header, and returns a ParseResult. In strict mode the first
bad row raises; otherwise bad rows are collected as rejects, each with a
line number and a machine-readable reason code. serialize(parse(file))
reproduces the parsed records exactly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, TextIO

from .errors import MalformedHeader, RowError
from .network import Segment
from .records import (
    CrashRecord,
    Direction,
    EnforcementSite,
    FmcsaCategory,
    FmcsaDailyRecord,
    PeriodLabel,
    ProbeSpeedRecord,
    RoadClass,
    Severity,
    SiteInitiativeRecord,
    SiteKind,
    Trajectory,
    VehicleClass,
    VwsRecord,
    VwsViolationCategory,
    Waypoint,
)
from .timeutil import format_rfc3339, parse_date, parse_rfc3339

PROBE_HEADER = ["segment_id", "epoch_start", "vehicle_class", "speed_mph"]
CRASH_HEADER = [
    "report_number", "timestamp", "lat", "lon", "severity", "cmv_involved",
    "direction_hint",
]
TRAJECTORY_HEADER = ["trip_id", "timestamp", "lat", "lon", "heading"]
VWS_HEADER = [
    "station_id", "timestamp", "fhwa_class", "gross_weight_lb", "speed_mph",
    "length_ft", "violations",
]
FMCSA_HEADER = [
    "date", "inspections", "vehicle_maintenance", "unsafe_driving",
    "hours_of_service", "driver_fitness", "hazmat", "controlled_substances",
    "oos_count",
]
SITE_INITIATIVE_HEADER = ["site_tag", "period_label", "inspections", "citations"]
SEGMENTS_HEADER = [
    "segment_id", "route_name", "direction", "county", "road_class",
    "length_miles", "speed_limit_mph", "geometry", "successors",
]
SITES_HEADER = ["site_id", "kind", "lat", "lon", "mainline_segment_ids", "bbox"]

# FMCSA violation columns in file order.
_FMCSA_COLUMNS = [
    FmcsaCategory.VEHICLE_MAINTENANCE,
    FmcsaCategory.UNSAFE_DRIVING,
    FmcsaCategory.HOURS_OF_SERVICE,
    FmcsaCategory.DRIVER_FITNESS,
    FmcsaCategory.HAZMAT_COMPLIANCE,
    FmcsaCategory.CONTROLLED_SUBSTANCES,
]

MAX_PROBE_SPEED_MPH = 120.0


@dataclass
class ParseResult:
    """Parsed records plus per-row rejects (best-effort mode only)."""

    records: list = field(default_factory=list)
    rejects: list[RowError] = field(default_factory=list)


def _rows(stream: TextIO | Iterable[str], expected_header: list[str]):
    """Yield (line_no, fields) after validating the exact header."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedHeader(",".join(expected_header), "") from None
    if header != expected_header:
        raise MalformedHeader(",".join(expected_header), ",".join(header))
    for fields_ in reader:
        if not fields_:
            continue  # blank line
        yield reader.line_num, fields_


def _parse_rows(
    stream: TextIO | Iterable[str],
    header: list[str],
    row_fn: Callable,
    strict: bool,
) -> ParseResult:
    """Shared parse loop: row_fn returns a record or raises RowError."""
    result = ParseResult()
    for line_no, fields_ in _rows(stream, header):
        if len(fields_) != len(header):
            err = RowError(
                line_no, "wrong_field_count",
                f"expected {len(header)} fields, got {len(fields_)}",
            )
            if strict:
                raise err
            result.rejects.append(err)
            continue
        try:
            result.records.append(row_fn(line_no, fields_))
        except RowError as err:
            if strict:
                raise
            result.rejects.append(err)
    return result


def _real(line_no: int, name: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise RowError(line_no, "bad_real", f"{name}: not a number: {text!r}") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise RowError(line_no, "bad_real", f"{name}: non-finite")
    return value


def _integer(line_no: int, name: str, text: str, minimum: int | None = 0) -> int:
    try:
        value = int(text)
    except ValueError:
        raise RowError(line_no, "bad_integer", f"{name}: not an integer: {text!r}") from None
    if minimum is not None and value < minimum:
        raise RowError(line_no, "negative_value", f"{name}: must be >= {minimum}")
    return value


def _timestamp(line_no: int, name: str, text: str):
    try:
        return parse_rfc3339(text)
    except ValueError as exc:
        raise RowError(line_no, "bad_timestamp", f"{name}: {exc}") from None


def _enum(line_no: int, name: str, enum_cls, text: str, code: str):
    try:
        return enum_cls(text)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise RowError(line_no, code, f"{name}: {text!r} not one of {allowed}") from None


# ---------------------------------------------------------------- probe


def parse_probe_csv(stream: TextIO | Iterable[str], strict: bool = True) -> ParseResult:
    def row(line_no: int, f: list[str]) -> ProbeSpeedRecord:
        epoch = _timestamp(line_no, "epoch_start", f[1])
        if epoch.minute % 5 != 0 or epoch.second != 0 or epoch.microsecond != 0:
            raise RowError(line_no, "epoch_not_aligned", "epoch not 5-minute aligned")
        vclass = _enum(line_no, "vehicle_class", VehicleClass, f[2], "bad_vehicle_class")
        speed = _real(line_no, "speed_mph", f[3])
        if not 0.0 < speed <= MAX_PROBE_SPEED_MPH:
            raise RowError(
                line_no, "speed_out_of_range",
                f"speed_mph must be in (0, {MAX_PROBE_SPEED_MPH:g}], got {speed:g}",
            )
        return ProbeSpeedRecord(f[0], epoch, vclass, speed)

    return _parse_rows(stream, PROBE_HEADER, row, strict)


def serialize_probe_csv(records: Sequence[ProbeSpeedRecord]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(PROBE_HEADER)
    for r in records:
        w.writerow([
            r.segment_id, format_rfc3339(r.epoch_start), r.vehicle_class.value,
            repr(r.speed_mph),
        ])
    return out.getvalue()


# ---------------------------------------------------------------- crash


_BOOL_TOKENS = {"true": True, "false": False, "1": True, "0": False}


def parse_crash_csv(stream: TextIO | Iterable[str], strict: bool = True) -> ParseResult:
    seen: set[str] = set()

    def row(line_no: int, f: list[str]) -> CrashRecord:
        report = f[0]
        if report in seen:
            raise RowError(
                line_no, "duplicate_report_number", f"report_number {report!r} repeats"
            )
        ts = _timestamp(line_no, "timestamp", f[1])
        lat = _real(line_no, "lat", f[2])
        lon = _real(line_no, "lon", f[3])
        severity = _enum(line_no, "severity", Severity, f[4], "bad_severity")
        flag = _BOOL_TOKENS.get(f[5].lower())
        if flag is None:
            raise RowError(line_no, "bad_boolean", f"cmv_involved: {f[5]!r}")
        hint = None
        if f[6] != "":
            hint = _enum(line_no, "direction_hint", Direction, f[6], "bad_direction")
        seen.add(report)
        return CrashRecord(report, ts, lat, lon, severity, flag, hint)

    return _parse_rows(stream, CRASH_HEADER, row, strict)


def serialize_crash_csv(records: Sequence[CrashRecord]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CRASH_HEADER)
    for r in records:
        w.writerow([
            r.report_number, format_rfc3339(r.timestamp), repr(r.lat), repr(r.lon),
            r.severity.value, "true" if r.cmv_involved else "false",
            r.direction_hint.value if r.direction_hint is not None else "",
        ])
    return out.getvalue()


# ---------------------------------------------------------------- trajectory


def parse_trajectory_csv(stream: TextIO | Iterable[str], strict: bool = True) -> ParseResult:
    """Waypoint rows grouped by trip_id, each trip time-sorted.

    Trips appear in the output in order of first appearance. A trip with
    fewer than 2 waypoints, or with duplicate timestamps after sorting,
    is rejected as a whole.
    """
    result = ParseResult()
    trips: dict[str, list[tuple[int, Waypoint]]] = {}

    def row(line_no: int, f: list[str]) -> None:
        ts = _timestamp(line_no, "timestamp", f[1])
        lat = _real(line_no, "lat", f[2])
        lon = _real(line_no, "lon", f[3])
        heading = None
        if f[4] != "":
            heading = _real(line_no, "heading", f[4])
            if not 0.0 <= heading < 360.0:
                raise RowError(line_no, "bad_heading", "heading must be in [0, 360)")
        trips.setdefault(f[0], []).append((line_no, Waypoint(ts, lat, lon, heading)))

    for line_no, fields_ in _rows(stream, TRAJECTORY_HEADER):
        if len(fields_) != len(TRAJECTORY_HEADER):
            err = RowError(
                line_no, "wrong_field_count",
                f"expected {len(TRAJECTORY_HEADER)} fields, got {len(fields_)}",
            )
            if strict:
                raise err
            result.rejects.append(err)
            continue
        try:
            row(line_no, fields_)
        except RowError as err:
            if strict:
                raise
            result.rejects.append(err)

    for trip_id, rows_ in trips.items():
        if len(rows_) < 2:
            err = RowError(
                rows_[0][0], "too_few_waypoints",
                f"trip {trip_id!r} needs >= 2 waypoints",
            )
            if strict:
                raise err
            result.rejects.append(err)
            continue
        rows_.sort(key=lambda lw: lw[1].timestamp)
        dup_line = next(
            (
                rows_[i + 1][0]
                for i in range(len(rows_) - 1)
                if rows_[i][1].timestamp == rows_[i + 1][1].timestamp
            ),
            None,
        )
        if dup_line is not None:
            err = RowError(
                dup_line, "duplicate_timestamp",
                f"trip {trip_id!r} repeats a waypoint timestamp",
            )
            if strict:
                raise err
            result.rejects.append(err)
            continue
        result.records.append(Trajectory(trip_id, tuple(w for _, w in rows_)))
    return result


def serialize_trajectory_csv(records: Sequence[Trajectory]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TRAJECTORY_HEADER)
    for t in records:
        for p in t.waypoints:
            w.writerow([
                t.trip_id, format_rfc3339(p.timestamp), repr(p.lat), repr(p.lon),
                repr(p.heading_deg) if p.heading_deg is not None else "",
            ])
    return out.getvalue()


# ---------------------------------------------------------------- vws


def parse_vws_csv(stream: TextIO | Iterable[str], strict: bool = True) -> ParseResult:
    def row(line_no: int, f: list[str]) -> VwsRecord:
        ts = _timestamp(line_no, "timestamp", f[1])
        fhwa = _integer(line_no, "fhwa_class", f[2], minimum=None)
        if not 1 <= fhwa <= 13:
            raise RowError(line_no, "fhwa_class_out_of_range", "fhwa_class must be 1..13")
        weight = _real(line_no, "gross_weight_lb", f[3])
        speed = _real(line_no, "speed_mph", f[4])
        length = _real(line_no, "length_ft", f[5])
        for name, value in (("gross_weight_lb", weight), ("speed_mph", speed),
                            ("length_ft", length)):
            if value < 0:
                raise RowError(line_no, "negative_value", f"{name}: must be >= 0")
        violations = set()
        if f[6] != "":
            for token in f[6].split("|"):
                violations.add(
                    _enum(line_no, "violations", VwsViolationCategory, token,
                          "unknown_violation_token")
                )
        return VwsRecord(f[0], ts, fhwa, weight, speed, length, frozenset(violations))

    return _parse_rows(stream, VWS_HEADER, row, strict)


def serialize_vws_csv(records: Sequence[VwsRecord]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(VWS_HEADER)
    for r in records:
        tokens = "|".join(sorted(v.value for v in r.violations))
        w.writerow([
            r.station_id, format_rfc3339(r.timestamp), r.fhwa_class,
            repr(r.gross_weight_lb), repr(r.speed_mph), repr(r.length_ft), tokens,
        ])
    return out.getvalue()


# ---------------------------------------------------------------- fmcsa


def parse_fmcsa_csv(stream: TextIO | Iterable[str], strict: bool = True) -> ParseResult:
    def row(line_no: int, f: list[str]) -> FmcsaDailyRecord:
        try:
            day = parse_date(f[0])
        except ValueError as exc:
            raise RowError(line_no, "bad_date", str(exc)) from None
        inspections = _integer(line_no, "inspections", f[1])
        by_category = {
            cat: _integer(line_no, cat.value, f[2 + i])
            for i, cat in enumerate(_FMCSA_COLUMNS)
        }
        oos = _integer(line_no, "oos_count", f[8])
        if oos > sum(by_category.values()):
            raise RowError(
                line_no, "oos_exceeds_violations",
                "oos_count exceeds the sum of violation categories",
            )
        return FmcsaDailyRecord(day, inspections, by_category, oos)

    return _parse_rows(stream, FMCSA_HEADER, row, strict)


def serialize_fmcsa_csv(records: Sequence[FmcsaDailyRecord]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(FMCSA_HEADER)
    for r in records:
        w.writerow(
            [r.date.isoformat(), r.inspections]
            + [r.violations_by_category.get(cat, 0) for cat in _FMCSA_COLUMNS]
            + [r.oos_count]
        )
    return out.getvalue()


# ---------------------------------------------------------------- site initiative


def parse_site_initiative_csv(
    stream: TextIO | Iterable[str], strict: bool = True
) -> ParseResult:
    seen: set[tuple[str, PeriodLabel]] = set()

    def row(line_no: int, f: list[str]) -> SiteInitiativeRecord:
        label = _enum(line_no, "period_label", PeriodLabel, f[1], "bad_period_label")
        key = (f[0], label)
        if key in seen:
            raise RowError(
                line_no, "duplicate_site_period",
                f"({f[0]!r}, {label.value}) repeats",
            )
        inspections = _integer(line_no, "inspections", f[2])
        citations = _integer(line_no, "citations", f[3])
        seen.add(key)
        return SiteInitiativeRecord(f[0], label, inspections, citations)

    return _parse_rows(stream, SITE_INITIATIVE_HEADER, row, strict)


def serialize_site_initiative_csv(records: Sequence[SiteInitiativeRecord]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SITE_INITIATIVE_HEADER)
    for r in records:
        w.writerow([r.site_tag, r.period_label.value, r.inspections, r.citations])
    return out.getvalue()


# ---------------------------------------------------------------- segments


def parse_segments_csv(stream: TextIO | Iterable[str], strict: bool = True) -> ParseResult:
    seen: set[str] = set()

    def row(line_no: int, f: list[str]) -> Segment:
        if f[0] in seen:
            raise RowError(line_no, "duplicate_segment", f"segment_id {f[0]!r} repeats")
        direction = _enum(line_no, "direction", Direction, f[2], "bad_direction")
        road_class = _enum(line_no, "road_class", RoadClass, f[4], "bad_road_class")
        length = _real(line_no, "length_miles", f[5])
        if length <= 0:
            raise RowError(line_no, "bad_length", "length_miles must be > 0")
        limit = None
        if f[6] != "":
            limit = _real(line_no, "speed_limit_mph", f[6])
            if limit <= 0:
                raise RowError(line_no, "bad_speed_limit", "speed_limit_mph must be > 0")
        points = []
        for part in f[7].split(";"):
            pieces = part.split()
            if len(pieces) != 2:
                raise RowError(line_no, "bad_geometry", f"bad point {part!r}")
            points.append((
                _real(line_no, "geometry lat", pieces[0]),
                _real(line_no, "geometry lon", pieces[1]),
            ))
        if len(points) < 2:
            raise RowError(line_no, "bad_geometry", "geometry needs >= 2 points")
        successors = tuple(s for s in f[8].split("|") if s != "")
        seen.add(f[0])
        return Segment(
            id=f[0], route_name=f[1], direction=direction, county=f[3],
            road_class=road_class, length_miles=length, speed_limit_mph=limit,
            geometry=tuple(points), successors=successors,
        )

    return _parse_rows(stream, SEGMENTS_HEADER, row, strict)


def serialize_segments_csv(records: Sequence[Segment]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SEGMENTS_HEADER)
    for s in records:
        geometry = ";".join(f"{repr(lat)} {repr(lon)}" for lat, lon in s.geometry)
        w.writerow([
            s.id, s.route_name, s.direction.value, s.county, s.road_class.value,
            repr(s.length_miles),
            repr(s.speed_limit_mph) if s.speed_limit_mph is not None else "",
            geometry, "|".join(s.successors),
        ])
    return out.getvalue()


# ---------------------------------------------------------------- sites


def parse_sites_csv(stream: TextIO | Iterable[str], strict: bool = True) -> ParseResult:
    seen: set[str] = set()

    def row(line_no: int, f: list[str]) -> EnforcementSite:
        if f[0] in seen:
            raise RowError(line_no, "duplicate_site", f"site_id {f[0]!r} repeats")
        kind = _enum(line_no, "kind", SiteKind, f[1], "bad_site_kind")
        lat = _real(line_no, "lat", f[2])
        lon = _real(line_no, "lon", f[3])
        mainline = tuple(s for s in f[4].split("|") if s != "")
        if not mainline:
            raise RowError(line_no, "empty_mainline", "mainline_segment_ids is empty")
        parts = f[5].split(";")
        if len(parts) != 4:
            raise RowError(line_no, "bad_bbox", "bbox needs 4 ;-separated values")
        bbox = tuple(_real(line_no, "bbox", p) for p in parts)
        if bbox[0] > bbox[2] or bbox[1] > bbox[3]:
            raise RowError(line_no, "bad_bbox", "bbox min exceeds max")
        if not (bbox[0] <= lat <= bbox[2] and bbox[1] <= lon <= bbox[3]):
            raise RowError(line_no, "bad_bbox", "bbox does not contain the site point")
        seen.add(f[0])
        return EnforcementSite(f[0], kind, lat, lon, mainline, bbox)

    return _parse_rows(stream, SITES_HEADER, row, strict)


def serialize_sites_csv(records: Sequence[EnforcementSite]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SITES_HEADER)
    for r in records:
        w.writerow([
            r.site_id, r.kind.value, repr(r.lat), repr(r.lon),
            "|".join(r.mainline_segment_ids),
            ";".join(repr(v) for v in r.bbox),
        ])
    return out.getvalue()


# ---------------------------------------------------------------- data dir


BUNDLE_FILES = {
    "segments.csv": (parse_segments_csv, serialize_segments_csv, "segments"),
    "probe.csv": (parse_probe_csv, serialize_probe_csv, "probe"),
    "crashes.csv": (parse_crash_csv, serialize_crash_csv, "crashes"),
    "trajectories.csv": (parse_trajectory_csv, serialize_trajectory_csv, "trajectories"),
    "vws.csv": (parse_vws_csv, serialize_vws_csv, "vws"),
    "fmcsa.csv": (parse_fmcsa_csv, serialize_fmcsa_csv, "fmcsa"),
    "sites.csv": (parse_sites_csv, serialize_sites_csv, "sites"),
    "site_initiative.csv": (
        parse_site_initiative_csv, serialize_site_initiative_csv, "site_initiative",
    ),
}


@dataclass
class DatasetBundle:
    """Everything a data directory can hold; missing files parse as empty."""

    segments: list[Segment] = field(default_factory=list)
    probe: list[ProbeSpeedRecord] = field(default_factory=list)
    crashes: list[CrashRecord] = field(default_factory=list)
    trajectories: list[Trajectory] = field(default_factory=list)
    vws: list[VwsRecord] = field(default_factory=list)
    fmcsa: list[FmcsaDailyRecord] = field(default_factory=list)
    sites: list[EnforcementSite] = field(default_factory=list)
    site_initiative: list[SiteInitiativeRecord] = field(default_factory=list)
    rejects: dict[str, list[RowError]] = field(default_factory=dict)


def load_data_dir(data_dir: str | Path, strict: bool = True) -> DatasetBundle:
    """Parse every recognized file present under data_dir.

    Strict-mode failures re-raise with the offending file name attached.
    """
    root = Path(data_dir)
    bundle = DatasetBundle()
    for name, (parser, _serializer, attr) in BUNDLE_FILES.items():
        path = root / name
        if not path.exists():
            continue
        with path.open(newline="", encoding="utf-8") as fh:
            try:
                result = parser(fh, strict=strict)
            except RowError as err:
                raise RowError(
                    err.line_no, err.code, f"{name}: {err.message}"
                ) from None
            except MalformedHeader as err:
                raise MalformedHeader(err.expected, f"{name}: {err.got}") from None
        setattr(bundle, attr, result.records)
        if result.rejects:
            bundle.rejects[name] = result.rejects
    return bundle


def write_bundle(bundle: DatasetBundle, data_dir: str | Path) -> None:
    """Serialize every non-empty dataset into data_dir (created if needed)."""
    root = Path(data_dir)
    root.mkdir(parents=True, exist_ok=True)
    for name, (_parser, serializer, attr) in BUNDLE_FILES.items():
        records = getattr(bundle, attr)
        if records:
            (root / name).write_text(serializer(records), encoding="utf-8")
