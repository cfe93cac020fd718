"""HTTP/JSON service over an immutable analysis snapshot.

Every handler takes one snapshot reference up front and answers entirely
from it, so hot swaps never mix builds inside a response. The service
adds no computation of its own beyond what the analysis modules expose;
identical (build_id, endpoint, params) always produce identical bytes.

Undefined metrics serialize as explicit nulls, never zeros. Validation
failures return 400 with a machine-readable code; unknown segment,
station, or site ids return 404.
"""

from __future__ import annotations

from datetime import date
from typing import Any, Mapping, Sequence

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .assessment import (
    SetBreakdown,
    SetSelection,
    compare_sets,
    run_assessment,
    serialize_assessment_csv,
    shortlist_sites,
    spec_from_doc,
)
from .crashes import HOTSPOT_SORT_KEYS, crash_summary, hotspot_rank
from .enforcement import WEIGHT_BINS, fmcsa_daily_series, vws_series
from .errors import (
    CmvSafetyError,
    EmptyScope,
    GranularityError,
    InvalidConfig,
    OverlappingPeriods,
    ValidationError,
)
from .filters import (
    TemporalFilter,
    coerce_dow_set,
    coerce_int_set,
    parse_dow_set,
    parse_int_set,
)
from .records import Severity, VehicleClass
from .snapshot import Snapshot, SnapshotHolder
from .timeutil import DateRange, parse_date

API_PREFIX = "/api/v1"

_ERROR_CODES = {
    OverlappingPeriods: "overlapping_periods",
    EmptyScope: "empty_scope",
    GranularityError: "granularity_error",
    InvalidConfig: "invalid_config",
    ValidationError: "validation_error",
}


class _NotFound(CmvSafetyError):
    def __init__(self, kind: str, missing: Sequence[str]) -> None:
        super().__init__(f"unknown {kind}: {', '.join(missing)}")
        self.kind = kind
        self.missing = list(missing)


def _error_code(exc: CmvSafetyError) -> str:
    for klass, code in _ERROR_CODES.items():
        if isinstance(exc, klass):
            return code
    return "bad_request"


def _bad_request(exc: CmvSafetyError) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"error": {"code": _error_code(exc), "message": str(exc)}},
    )


def _not_found(exc: _NotFound) -> JSONResponse:
    return JSONResponse(
        status_code=404,
        content={
            "error": {
                "code": "not_found",
                "message": str(exc),
                "kind": exc.kind,
                "missing": exc.missing,
            }
        },
    )


# ------------------------------------------------------------- param parsing


def _temporal_from_params(
    years: str | None,
    months: str | None,
    weeks: str | None,
    dows: str | None,
    hours: str | None,
) -> TemporalFilter:
    return TemporalFilter(
        years=parse_int_set(years, "years"),
        months=parse_int_set(months, "months"),
        iso_weeks=parse_int_set(weeks, "weeks"),
        days_of_week=parse_dow_set(dows),
        hours=parse_int_set(hours, "hours"),
    )


def _split_ids(raw: str | None) -> list[str]:
    if raw is None:
        return []
    ids = [token.strip() for token in raw.split(",") if token.strip()]
    if not ids:
        raise ValidationError("id list is empty")
    return ids


def _vehicle_class(raw: str | None) -> VehicleClass:
    if raw is None:
        return VehicleClass.ALL
    try:
        return VehicleClass(raw)
    except ValueError:
        raise ValidationError(
            f"vehicle_class must be one of {[c.value for c in VehicleClass]}"
        ) from None


def _date_param(raw: str | None, name: str) -> date | None:
    if raw is None:
        return None
    try:
        return parse_date(raw)
    except ValueError as exc:
        raise ValidationError(f"{name}: {exc}") from None


def _date_range_from_params(
    snapshot_dates: Sequence[date], start: str | None, end: str | None
) -> DateRange | None:
    lo = _date_param(start, "start")
    hi = _date_param(end, "end")
    if lo is None or hi is None:
        if not snapshot_dates:
            return None
        lo = lo if lo is not None else min(snapshot_dates)
        hi = hi if hi is not None else max(snapshot_dates)
    if hi < lo:
        raise ValidationError("end must not precede start")
    return DateRange(lo, hi)


def _require(body: Mapping[str, Any], key: str) -> Any:
    if key not in body:
        raise ValidationError(f"missing required field {key!r}")
    return body[key]


def _selection_from_body(raw: Any, fallback_label: str) -> SetSelection:
    if not isinstance(raw, Mapping):
        raise ValidationError(f"{fallback_label} must be an object")
    members = raw.get("members")
    if not isinstance(members, list) or not all(
        isinstance(m, str) for m in members
    ):
        raise ValidationError(f"{fallback_label}.members must be a string list")
    return SetSelection(
        label=str(raw.get("label", fallback_label)), members=tuple(members)
    )


# --------------------------------------------------------------- documents


def _round6(value: float | None) -> float | None:
    # Stable wire format for derived floats; raw tables keep full repr.
    return None if value is None else round(value, 6)


def _breakdown_doc(breakdown: SetBreakdown) -> dict:
    def cells(seq):
        return [{"key": c.key, "value": _round6(c.value)} for c in seq]

    return {
        "label": breakdown.label,
        "members": list(breakdown.members),
        "overall": _round6(breakdown.overall),
        "annual": cells(breakdown.annual),
        "monthly": cells(breakdown.monthly),
        "day_of_week": cells(breakdown.day_of_week),
        "hourly": None if breakdown.hourly is None else cells(breakdown.hourly),
    }


def _segment_doc(snapshot: Snapshot, segment_id: str) -> dict:
    seg = snapshot.graph.get(segment_id)
    return {
        "segment_id": seg.id,
        "route_name": seg.route_name,
        "direction": seg.direction.value,
        "county": seg.county,
        "road_class": seg.road_class.value,
        "length_miles": seg.length_miles,
        "speed_limit_mph": seg.speed_limit_mph,
        "geometry": [[lat, lon] for lat, lon in seg.geometry],
        "successors": list(seg.successors),
    }


def create_app(holder: SnapshotHolder) -> FastAPI:
    app = FastAPI(title="cmvsafety", docs_url=None, redoc_url=None)

    @app.exception_handler(_NotFound)
    async def on_not_found(request: Request, exc: _NotFound):
        return _not_found(exc)

    @app.exception_handler(CmvSafetyError)
    async def on_domain_error(request: Request, exc: CmvSafetyError):
        return _bad_request(exc)

    def check_known(kind: str, wanted: Sequence[str], known) -> None:
        missing = sorted(x for x in set(wanted) if x not in known)
        if missing:
            raise _NotFound(kind, missing)

    @app.get(API_PREFIX + "/segments")
    def segments(
        route: str | None = None,
        county: str | None = None,
        segments: str | None = None,
        limit: int | None = None,
        offset: int = 0,
    ):
        snap = holder.get()
        if limit is not None and limit < 0:
            raise ValidationError("limit must be nonnegative")
        if offset < 0:
            raise ValidationError("offset must be nonnegative")
        wanted = _split_ids(segments)
        check_known("segment", wanted, snap.graph)
        ids = wanted or sorted(s.id for s in snap.bundle.segments)
        docs = []
        for sid in ids:
            seg = snap.graph.get(sid)
            if route is not None and seg.route_name != route:
                continue
            if county is not None and seg.county != county:
                continue
            docs.append(_segment_doc(snap, sid))
        total = len(docs)
        docs = docs[offset:]
        if limit is not None:
            docs = docs[:limit]
        return {"build_id": snap.build_id, "total": total, "segments": docs}

    @app.get(API_PREFIX + "/metrics/speed")
    def metrics_speed(
        segments: str | None = None,
        vehicle_class: str | None = None,
        years: str | None = None,
        months: str | None = None,
        weeks: str | None = None,
        dows: str | None = None,
        hours: str | None = None,
    ):
        snap = holder.get()
        vclass = _vehicle_class(vehicle_class)
        temporal = _temporal_from_params(years, months, weeks, dows, hours)
        wanted = _split_ids(segments)
        check_known("segment", wanted, snap.graph)
        ids = wanted or sorted(s.id for s in snap.bundle.segments)

        docs = []
        for sid in ids:
            cells = [
                a
                for a in snap.aggregates
                if a.segment_id == sid
                and a.vehicle_class is vclass
                and temporal.matches(a.date, a.hour)
            ]
            epochs = sum(c.epochs_observed for c in cells)

            def weighted(value_of):
                num = 0.0
                den = 0
                for c in cells:
                    v = value_of(c)
                    if v is None or c.epochs_observed == 0:
                        continue
                    num += v * c.epochs_observed
                    den += c.epochs_observed
                return None if den == 0 else num / den

            harmonic_num = sum(
                c.epochs_observed for c in cells if c.harmonic_speed_mph > 0
            )
            harmonic_den = sum(
                c.epochs_observed / c.harmonic_speed_mph
                for c in cells
                if c.harmonic_speed_mph > 0
            )
            reference = snap.reference_speeds.get((sid, vclass))
            docs.append({
                "segment_id": sid,
                "speed_limit_mph": snap.graph.speed_limit(sid),
                "vehicle_class": vclass.value,
                "hours_observed": len(cells),
                "epochs_observed": epochs,
                "mean_speed_mph": _round6(weighted(lambda c: c.mean_speed_mph)),
                "harmonic_speed_mph": _round6(
                    harmonic_num / harmonic_den if harmonic_den > 0 else None
                ),
                "min_speed_mph": min((c.min_speed_mph for c in cells), default=None),
                "max_speed_mph": max((c.max_speed_mph for c in cells), default=None),
                "pct_over_limit": _round6(weighted(lambda c: c.pct_over_limit)),
                "pct_over_limit_uncongested": _round6(
                    weighted(lambda c: c.pct_over_limit_uncongested)
                ),
                "reference_speed_mph": (
                    None if reference is None else _round6(reference.value_mph)
                ),
            })
        return {"build_id": snap.build_id, "segments": docs}

    @app.get(API_PREFIX + "/metrics/crashes")
    def metrics_crashes(
        segments: str | None = None,
        years: str | None = None,
        months: str | None = None,
        weeks: str | None = None,
        dows: str | None = None,
        hours: str | None = None,
        top: int = 10,
        sort_by: str = "crash_count",
    ):
        snap = holder.get()
        temporal = _temporal_from_params(years, months, weeks, dows, hours)
        wanted = _split_ids(segments)
        check_known("segment", wanted, snap.graph)
        if sort_by not in HOTSPOT_SORT_KEYS:
            raise ValidationError(f"sort_by must be one of {HOTSPOT_SORT_KEYS}")
        summary = crash_summary(
            snap.crash_assignments,
            snap.bundle.crashes,
            segment_ids=set(wanted) if wanted else None,
            temporal=temporal,
        )
        hotspots = hotspot_rank(
            snap.crash_assignments,
            snap.bundle.crashes,
            temporal=temporal,
            top_k=top,
            sort_key=sort_by,
        )
        if wanted:
            hotspots = [h for h in hotspots if h.segment_id in set(wanted)]
        return {
            "build_id": snap.build_id,
            "summary": {
                "total_all": summary.total_all,
                "total_cmv": summary.total_cmv,
                "by_severity": {
                    sev.value: {
                        "all": summary.by_severity[sev][0],
                        "cmv": summary.by_severity[sev][1],
                    }
                    for sev in Severity
                    if sev in summary.by_severity
                },
            },
            "hotspots": [
                {
                    "segment_id": h.segment_id,
                    "crash_count": h.crash_count,
                    "fatal_count": h.fatal_count,
                    "cmv_crash_count": h.cmv_crash_count,
                    "rank": h.rank,
                }
                for h in hotspots
            ],
        }

    @app.get(API_PREFIX + "/metrics/fmcsa")
    def metrics_fmcsa(
        start: str | None = None,
        end: str | None = None,
        dows: str | None = None,
        hours: str | None = None,
    ):
        snap = holder.get()
        if hours is not None:
            raise GranularityError("FMCSA data is daily; hours cannot apply")
        dow_set = parse_dow_set(dows)
        span = _date_range_from_params(
            [r.date for r in snap.bundle.fmcsa], start, end
        )
        if span is None:
            return {"build_id": snap.build_id, "series": []}
        points = fmcsa_daily_series(snap.bundle.fmcsa, span)
        docs = []
        for p in points:
            if dow_set is not None and p.bucket_date.weekday() not in dow_set:
                continue
            pct = (
                None
                if p.total == 0
                else 100.0 * p.flagged / p.total
            )
            docs.append({
                "date": p.bucket_date.isoformat(),
                "inspections": p.total,
                "oos": p.flagged,
                "pct_oos": _round6(pct),
            })
        return {"build_id": snap.build_id, "series": docs}

    @app.get(API_PREFIX + "/metrics/vws")
    def metrics_vws(
        stations: str | None = None,
        granularity: str = "daily",
        start: str | None = None,
        end: str | None = None,
        dows: str | None = None,
        hours: str | None = None,
        classes: str | None = None,
        weight_bin: str | None = None,
    ):
        snap = holder.get()
        wanted = _split_ids(stations)
        if not wanted:
            raise ValidationError("stations parameter is required")
        known = {r.station_id for r in snap.bundle.vws}
        check_known("station", wanted, known)
        dow_set = parse_dow_set(dows)
        hour_set = parse_int_set(hours, "hours")
        class_set = parse_int_set(classes, "classes")
        if weight_bin is not None and weight_bin not in WEIGHT_BINS:
            raise ValidationError(
                f"weight_bin must be one of {sorted(WEIGHT_BINS)}"
            )
        span = _date_range_from_params(
            [r.timestamp.date() for r in snap.bundle.vws if r.station_id in set(wanted)],
            start,
            end,
        )
        if span is None:
            return {"build_id": snap.build_id, "series": []}
        records = snap.bundle.vws
        if dow_set is not None:
            records = [r for r in records if r.timestamp.weekday() in dow_set]
        if hour_set is not None:
            records = [r for r in records if r.timestamp.hour in hour_set]
        points = vws_series(
            records,
            station_ids=set(wanted),
            date_range=span,
            granularity=granularity,
            fhwa_classes=class_set,
            weight_bins=(weight_bin,) if weight_bin is not None else None,
        )
        docs = []
        for p in points:
            pct = None if p.total == 0 else 100.0 * p.flagged / p.total
            docs.append({
                "bucket": p.bucket_label,
                "date": p.bucket_date.isoformat(),
                "hour": p.bucket_hour,
                "total": p.total,
                "flagged": p.flagged,
                "by_category": dict(p.by_category),
                "pct_flagged": _round6(pct),
            })
        return {"build_id": snap.build_id, "series": docs}

    @app.get(API_PREFIX + "/detours/{site_id}")
    def detours(site_id: str):
        snap = holder.get()
        if site_id not in snap.sites:
            raise _NotFound("site", [site_id])
        site = snap.sites[site_id]
        counts = snap.site_trip_counts[site_id]
        return {
            "build_id": snap.build_id,
            "site_id": site_id,
            "site_kind": site.kind.value,
            "mainline_segment_ids": list(site.mainline_segment_ids),
            "trip_counts": dict(counts),
            "routes": [
                {
                    "route_key": r.route_key,
                    "segment_ids": r.route_key.split(">"),
                    "trip_count": r.trip_count,
                    "avg_travel_time_min": _round6(r.avg_travel_time_min),
                    "total_length_miles": _round6(r.total_length_miles),
                    "crash_count": r.crash_count,
                }
                for r in snap.route_tables[site_id]
            ],
        }

    @app.post(API_PREFIX + "/compare")
    async def compare(request: Request):
        snap = holder.get()
        body = await _json_body(request)
        metric = str(_require(body, "metric"))
        reference = _selection_from_body(_require(body, "reference"), "reference")
        target = _selection_from_body(_require(body, "target"), "target")
        filters = body.get("filters") or {}
        if not isinstance(filters, Mapping):
            raise ValidationError("filters must be an object")
        temporal = TemporalFilter(
            years=coerce_int_set(filters.get("years"), "years"),
            months=coerce_int_set(filters.get("months"), "months"),
            iso_weeks=coerce_int_set(filters.get("weeks"), "weeks"),
            days_of_week=coerce_dow_set(filters.get("dows")),
            hours=coerce_int_set(filters.get("hours"), "hours"),
        )
        levels = body.get("levels")
        if levels is not None and (
            not isinstance(levels, list)
            or not all(isinstance(x, str) for x in levels)
        ):
            raise ValidationError("levels must be a string list")
        vclass = _vehicle_class(body.get("vehicle_class"))
        result = compare_sets(
            reference,
            target,
            temporal,
            metric,
            snap.analytics,
            vehicle_class=vclass,
            levels=tuple(levels) if levels is not None else None,
        )
        return {
            "build_id": snap.build_id,
            "metric": result.metric,
            "vehicle_class": result.vehicle_class.value,
            "reference": _breakdown_doc(result.reference),
            "target": _breakdown_doc(result.target),
        }

    @app.post(API_PREFIX + "/assessment")
    async def assessment(request: Request):
        snap = holder.get()
        body = await _json_body(request)
        rows = run_assessment(spec_from_doc(body), snap.analytics)
        return {
            "build_id": snap.build_id,
            "rows": [
                {
                    "metric": r.metric,
                    "scope": r.scope,
                    "before": _round6(r.before),
                    "during": _round6(r.during),
                    "after": _round6(r.after),
                    "pc_before_during": _round6(r.pc_before_during),
                    "pc_during_after": _round6(r.pc_during_after),
                    "pc_before_after": _round6(r.pc_before_after),
                    "pp_before_during": _round6(r.pp_before_during),
                    "pp_during_after": _round6(r.pp_during_after),
                    "pp_before_after": _round6(r.pp_before_after),
                    "halo": r.halo.value,
                }
                for r in rows
            ],
            "csv": serialize_assessment_csv(rows),
        }

    @app.get(API_PREFIX + "/shortlist")
    def shortlist(request: Request):
        snap = holder.get()
        lists = [
            [token.strip() for token in raw.split(",") if token.strip()]
            for raw in request.query_params.getlist("list")
        ]
        sites = shortlist_sites(lists)
        return {"build_id": snap.build_id, "sites": sites}

    @app.get(API_PREFIX + "/meta")
    def meta():
        snap = holder.get()
        report = snap.report
        return {
            "build_id": snap.build_id,
            "built_at": snap.built_at,
            "report": {
                "segments": report.segments,
                "probe_records": report.probe_records,
                "crashes": report.crashes,
                "crashes_matched": report.crashes_matched,
                "trajectories": report.trajectories,
                "trips_matched": report.trips_matched,
                "trips_skipped": report.trips_skipped,
                "vws_records": report.vws_records,
                "fmcsa_days": report.fmcsa_days,
                "sites": report.sites,
                "initiative_rows": report.initiative_rows,
                "rejects_by_file": dict(report.rejects_by_file),
                "build_ms": report.build_ms,
            },
            "sites": sorted(snap.sites),
        }

    return app


async def _json_body(request: Request) -> Mapping[str, Any]:
    try:
        body = await request.json()
    except Exception:
        raise ValidationError("request body must be valid JSON") from None
    if not isinstance(body, Mapping):
        raise ValidationError("request body must be a JSON object")
    return body
