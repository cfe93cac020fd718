"""Planning and evaluation logic.

Reference-vs-target comparisons, candidate-site shortlisting, percent
change arithmetic, and the before/during/after assessment table with
halo indication. Values stay raw internally; display rounding applies
only in the CSV serializer.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import date
from typing import Callable, Iterable, Mapping, Sequence

import csv
import io

from .crashes import CrashAssignment
from .enforcement import citations_per_inspection
from .errors import (
    EmptyScope,
    GranularityError,
    OverlappingPeriods,
    ValidationError,
)
from .filters import TemporalFilter, coerce_dow_set, coerce_int_set
from .records import (
    CrashRecord,
    FmcsaDailyRecord,
    PeriodLabel,
    SiteInitiativeRecord,
    VehicleClass,
    VwsRecord,
)
from .speed import HourlyAggregate
from .timeutil import DOW_TOKENS, DateRange, parse_date

ASSESSMENT_CSV_HEADER = [
    "metric", "scope", "before", "during", "after", "pc_before_during",
    "pc_during_after", "pc_before_after", "halo",
]

# Metrics whose values are percentages (get point-difference columns and
# 1-decimal display); ratio metrics display at 2 decimals.
PCT_METRICS = frozenset({"pct_over_limit", "pct_over_limit_uncongested"})
RATIO_METRICS = frozenset({"citations_per_inspection"})
COUNT_METRICS = frozenset({"inspections", "citations", "crash_count"})

COMPARE_METRICS = (
    "mean_speed", "pct_over_limit", "pct_over_limit_uncongested",
    "crash_count", "vws_citations", "fmcsa_inspections", "fmcsa_oos",
)
FMCSA_SOURCED = frozenset({"fmcsa_inspections", "fmcsa_oos"})
BREAKDOWN_LEVELS = ("annual", "monthly", "day_of_week", "hourly")


class ImprovementDirection(str, enum.Enum):
    LOWER_IS_BETTER = "LowerIsBetter"
    HIGHER_IS_BETTER = "HigherIsBetter"


class Halo(str, enum.Enum):
    PRESENT = "Present"
    ABSENT = "Absent"
    INDETERMINATE = "Indeterminate"


def percent_change(base: float, new: float) -> float | None:
    """Relative change in percent with chronological base; None when base is 0."""
    if base == 0:
        return None
    return 100.0 * (new - base) / base


@dataclass
class AnalyticsData:
    """The immutable inputs assessments and comparisons read from."""

    aggregates: Sequence[HourlyAggregate] = ()
    crashes: Sequence[CrashRecord] = ()
    crash_assignments: Sequence[CrashAssignment] = ()
    vws: Sequence[VwsRecord] = ()
    fmcsa: Sequence[FmcsaDailyRecord] = ()
    site_initiative: Sequence[SiteInitiativeRecord] = ()


# ---------------------------------------------------------------- shortlist


def shortlist_sites(criterion_lists: Sequence[Sequence[str]]) -> list[str]:
    """Locations present in every list, in the first list's order."""
    if len(criterion_lists) < 2:
        raise ValidationError("shortlist needs at least 2 criterion lists")
    rest = [set(lst) for lst in criterion_lists[1:]]
    out = []
    seen = set()
    for candidate in criterion_lists[0]:
        if candidate in seen:
            continue
        seen.add(candidate)
        if all(candidate in s for s in rest):
            out.append(candidate)
    return out


# ---------------------------------------------------------------- rollups


def _weighted_rollup(
    cells: Iterable[HourlyAggregate], value_of: Callable[[HourlyAggregate], float | None]
) -> float | None:
    """Epochs-weighted mean of per-cell values, skipping undefined cells.

    Exact for mean speed and pct_over_limit (their cell values are
    epoch-count weighted by construction); for the uncongested variant
    this is an estimator, since cell denominators are not persisted.
    """
    total_epochs = 0
    weighted = 0.0
    for cell in cells:
        v = value_of(cell)
        if v is None or cell.epochs_observed == 0:
            continue
        total_epochs += cell.epochs_observed
        weighted += v * cell.epochs_observed
    if total_epochs == 0:
        return None
    return weighted / total_epochs


def _agg_cells(
    data: AnalyticsData,
    segment_ids: set[str],
    vehicle_class: VehicleClass,
    keep: Callable[[date, int], bool],
) -> list[HourlyAggregate]:
    return [
        a
        for a in data.aggregates
        if a.segment_id in segment_ids
        and a.vehicle_class == vehicle_class
        and keep(a.date, a.hour)
    ]


_AGG_FIELD = {
    "mean_speed": lambda a: a.mean_speed_mph,
    "pct_over_limit": lambda a: a.pct_over_limit,
    "pct_over_limit_uncongested": lambda a: a.pct_over_limit_uncongested,
}


# ---------------------------------------------------------------- compare


@dataclass(frozen=True)
class SetSelection:
    """A labeled set of segment ids or station ids."""

    label: str
    members: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise EmptyScope(f"{self.label}: at least one corridor is required")


@dataclass(frozen=True)
class BreakdownCell:
    key: str
    value: float | None


@dataclass(frozen=True)
class SetBreakdown:
    label: str
    members: tuple[str, ...]
    overall: float | None
    annual: tuple[BreakdownCell, ...]
    monthly: tuple[BreakdownCell, ...]
    day_of_week: tuple[BreakdownCell, ...]
    hourly: tuple[BreakdownCell, ...] | None  # None for daily-floor metrics


@dataclass(frozen=True)
class ComparisonResult:
    metric: str
    vehicle_class: VehicleClass
    reference: SetBreakdown
    target: SetBreakdown


def _metric_evaluator(
    metric: str,
    members: tuple[str, ...],
    data: AnalyticsData,
    vehicle_class: VehicleClass,
) -> Callable[[Callable[[date, int], bool]], float | None]:
    """Returns f(keep) computing the metric over records passing keep(date, hour)."""
    member_set = set(members)
    if metric in _AGG_FIELD:
        value_of = _AGG_FIELD[metric]

        def agg_eval(keep):
            return _weighted_rollup(
                _agg_cells(data, member_set, vehicle_class, keep), value_of
            )

        return agg_eval
    if metric == "crash_count":
        by_report = {a.report_number: a for a in data.crash_assignments}

        def crash_eval(keep):
            n = 0
            for crash in data.crashes:
                assignment = by_report.get(crash.report_number)
                if assignment is None or assignment.segment_id not in member_set:
                    continue
                ts = crash.timestamp
                if keep(ts.date(), ts.hour):
                    n += 1
            return float(n)

        return crash_eval
    if metric == "vws_citations":

        def vws_eval(keep):
            return float(
                sum(
                    1
                    for r in data.vws
                    if r.station_id in member_set
                    and r.violations
                    and keep(r.timestamp.date(), r.timestamp.hour)
                )
            )

        return vws_eval
    if metric in FMCSA_SOURCED:
        def fmcsa_eval(keep):
            total = 0
            for r in data.fmcsa:
                if keep(r.date, -1):  # hour never consulted for daily data
                    total += r.inspections if metric == "fmcsa_inspections" else r.oos_count
            return float(total)

        return fmcsa_eval
    raise ValidationError(f"unknown comparison metric {metric!r}")


def _breakdown(
    metric: str,
    selection: SetSelection,
    temporal: TemporalFilter,
    data: AnalyticsData,
    vehicle_class: VehicleClass,
) -> SetBreakdown:
    evaluate = _metric_evaluator(metric, selection.members, data, vehicle_class)
    daily_floor = metric in FMCSA_SOURCED

    def keep_base(d: date, hour: int) -> bool:
        if daily_floor:
            return temporal.matches_date(d)
        return temporal.matches(d, hour)

    # Bucket keys present in the filtered data for the unbounded dimensions.
    years: set[int] = set()
    months: set[str] = set()

    def observe(d: date) -> None:
        years.add(d.year)
        months.add(f"{d.year:04d}-{d.month:02d}")

    for a in data.aggregates:
        if keep_base(a.date, a.hour):
            observe(a.date)
    for c in data.crashes:
        if keep_base(c.timestamp.date(), c.timestamp.hour):
            observe(c.timestamp.date())
    for v in data.vws:
        if keep_base(v.timestamp.date(), v.timestamp.hour):
            observe(v.timestamp.date())
    for f_ in data.fmcsa:
        if keep_base(f_.date, 0):
            observe(f_.date)

    annual = tuple(
        BreakdownCell(
            str(y), evaluate(lambda d, h, y=y: keep_base(d, h) and d.year == y)
        )
        for y in sorted(years)
    )
    monthly = tuple(
        BreakdownCell(
            m,
            evaluate(
                lambda d, h, m=m: keep_base(d, h)
                and f"{d.year:04d}-{d.month:02d}" == m
            ),
        )
        for m in sorted(months)
    )
    day_of_week = tuple(
        BreakdownCell(
            DOW_TOKENS[i],
            evaluate(lambda d, h, i=i: keep_base(d, h) and d.weekday() == i),
        )
        for i in range(7)
    )
    if daily_floor:
        hourly = None
    else:
        hourly = tuple(
            BreakdownCell(
                str(hh), evaluate(lambda d, h, hh=hh: keep_base(d, h) and h == hh)
            )
            for hh in range(24)
        )
    return SetBreakdown(
        label=selection.label,
        members=selection.members,
        overall=evaluate(keep_base),
        annual=annual,
        monthly=monthly,
        day_of_week=day_of_week,
        hourly=hourly,
    )


def compare_sets(
    reference: SetSelection,
    target: SetSelection,
    temporal: TemporalFilter,
    metric: str,
    data: AnalyticsData,
    vehicle_class: VehicleClass = VehicleClass.ALL,
    levels: Sequence[str] | None = None,
) -> ComparisonResult:
    """The same metric over both sets at every breakdown level.

    FMCSA-sourced metrics have a daily floor: their hourly breakdown is
    omitted, and explicitly requesting it (or filtering them by hour)
    raises GranularityError.
    """
    if metric not in COMPARE_METRICS:
        raise ValidationError(
            f"metric must be one of {COMPARE_METRICS}, got {metric!r}"
        )
    if levels is not None:
        for level in levels:
            if level not in BREAKDOWN_LEVELS:
                raise ValidationError(f"unknown breakdown level {level!r}")
    if metric in FMCSA_SOURCED:
        if levels is not None and "hourly" in levels:
            raise GranularityError(f"{metric} supports daily granularity only")
        if temporal.restricts_hours:
            raise GranularityError(f"{metric} cannot be filtered by hour")
    return ComparisonResult(
        metric=metric,
        vehicle_class=vehicle_class,
        reference=_breakdown(metric, reference, temporal, data, vehicle_class),
        target=_breakdown(metric, target, temporal, data, vehicle_class),
    )


# ---------------------------------------------------------------- assessment


@dataclass(frozen=True)
class ScopeSpec:
    """Where a metric reads its data.

    kind "site" uses period-labeled initiative records (members: one site
    tag); "statewide" uses FMCSA daily records; "stations" uses VWS
    passes (members: station ids); "segments" uses hourly aggregates or
    crash assignments (members: segment ids).
    """

    kind: str
    members: tuple[str, ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("site", "statewide", "stations", "segments"):
            raise ValidationError(f"unknown scope kind {self.kind!r}")
        if self.kind == "site" and len(self.members) != 1:
            raise ValidationError("site scope takes exactly one site tag")
        if self.kind in ("stations", "segments") and not self.members:
            raise EmptyScope(f"{self.kind} scope needs members")

    @property
    def display(self) -> str:
        return self.label or (
            "statewide" if self.kind == "statewide" else ",".join(self.members)
        )


@dataclass(frozen=True)
class MetricSpec:
    metric: str
    scope: ScopeSpec
    direction: ImprovementDirection = ImprovementDirection.LOWER_IS_BETTER
    vehicle_class: VehicleClass = VehicleClass.ALL


@dataclass(frozen=True)
class AssessmentSpec:
    before: DateRange
    during: DateRange
    after: DateRange | None
    metrics: tuple[MetricSpec, ...]
    days_of_week: frozenset[int] | None = None
    hours: frozenset[int] | None = None

    def __post_init__(self) -> None:
        periods = [("before", self.before), ("during", self.during)]
        if self.after is not None:
            periods.append(("after", self.after))
        for i in range(len(periods) - 1):
            (name_a, a), (name_b, b) = periods[i], periods[i + 1]
            if a.overlaps(b):
                raise OverlappingPeriods(f"{name_a} and {name_b} periods overlap")
            if not b.start > a.end:
                raise OverlappingPeriods(
                    f"{name_b} period must start after {name_a} ends"
                )


@dataclass(frozen=True)
class AssessmentRow:
    metric: str
    scope: str
    before: float | None
    during: float | None
    after: float | None
    pc_before_during: float | None
    pc_during_after: float | None
    pc_before_after: float | None
    halo: Halo
    # Point differences, populated for percentage-valued metrics only.
    pp_before_during: float | None = None
    pp_during_after: float | None = None
    pp_before_after: float | None = None


_PERIOD_LABELS = (PeriodLabel.BEFORE, PeriodLabel.ENFORCEMENT, PeriodLabel.AFTER)


def _site_period_values(
    metric: str, site_tag: str, data: AnalyticsData
) -> list[float | None]:
    by_label: dict[PeriodLabel, SiteInitiativeRecord] = {
        r.period_label: r for r in data.site_initiative if r.site_tag == site_tag
    }
    out: list[float | None] = []
    for label in _PERIOD_LABELS:
        rec = by_label.get(label)
        if rec is None:
            out.append(None)
        elif metric == "inspections":
            out.append(float(rec.inspections))
        elif metric == "citations":
            out.append(float(rec.citations))
        elif metric == "citations_per_inspection":
            out.append(citations_per_inspection(rec.citations, rec.inspections))
        else:
            raise ValidationError(f"metric {metric!r} unsupported for site scope")
    return out


def _range_value(
    spec: MetricSpec,
    data: AnalyticsData,
    period: DateRange,
    dows: frozenset[int] | None,
    hours: frozenset[int] | None,
) -> float | None:
    """One metric value over one period for date-ranged scopes.

    Daily sources (FMCSA) apply day-of-week filters but ignore the hour
    filter, which cannot be expressed at daily granularity.
    """

    def keep_date(d: date) -> bool:
        if d not in period:
            return False
        return dows is None or d.weekday() in dows

    def keep(d: date, hour: int) -> bool:
        return keep_date(d) and (hours is None or hour in hours)

    scope = spec.scope
    if scope.kind == "statewide":
        if spec.metric in ("inspections", "citations", "citations_per_inspection"):
            inspections = sum(r.inspections for r in data.fmcsa if keep_date(r.date))
            citations = sum(r.oos_count for r in data.fmcsa if keep_date(r.date))
            if spec.metric == "inspections":
                return float(inspections)
            if spec.metric == "citations":
                return float(citations)
            return citations_per_inspection(citations, inspections)
        if spec.metric == "crash_count":
            return float(
                sum(1 for c in data.crashes if keep(c.timestamp.date(), c.timestamp.hour))
            )
        raise ValidationError(f"metric {spec.metric!r} unsupported statewide")
    if scope.kind == "stations":
        members = set(scope.members)
        passes = [
            r
            for r in data.vws
            if r.station_id in members and keep(r.timestamp.date(), r.timestamp.hour)
        ]
        flagged = sum(1 for r in passes if r.violations)
        if spec.metric == "inspections":
            return float(len(passes))
        if spec.metric == "citations":
            return float(flagged)
        if spec.metric == "citations_per_inspection":
            return citations_per_inspection(flagged, len(passes))
        raise ValidationError(f"metric {spec.metric!r} unsupported for stations")
    if scope.kind == "segments":
        if spec.metric in _AGG_FIELD:
            cells = _agg_cells(data, set(scope.members), spec.vehicle_class, keep)
            return _weighted_rollup(cells, _AGG_FIELD[spec.metric])
        if spec.metric == "crash_count":
            by_report = {a.report_number: a for a in data.crash_assignments}
            members = set(scope.members)
            n = 0
            for crash in data.crashes:
                assignment = by_report.get(crash.report_number)
                if (
                    assignment is not None
                    and assignment.segment_id in members
                    and keep(crash.timestamp.date(), crash.timestamp.hour)
                ):
                    n += 1
            return float(n)
        raise ValidationError(f"metric {spec.metric!r} unsupported for segments")
    raise ValidationError(f"unsupported scope kind {scope.kind!r}")


def _improved(direction: ImprovementDirection, base: float, new: float) -> bool:
    if direction is ImprovementDirection.LOWER_IS_BETTER:
        return new < base
    return new > base


def _halo(
    direction: ImprovementDirection,
    before: float | None,
    during: float | None,
    after: float | None,
) -> Halo:
    if before is None or during is None or after is None:
        return Halo.INDETERMINATE
    if _improved(direction, before, during) and _improved(direction, before, after):
        return Halo.PRESENT
    return Halo.ABSENT


def run_assessment(spec: AssessmentSpec, data: AnalyticsData) -> list[AssessmentRow]:
    """One row per metric: period values, pairwise percent changes, halo."""
    rows = []
    for m in spec.metrics:
        if m.scope.kind == "site":
            before, during, after = _site_period_values(
                m.metric, m.scope.members[0], data
            )
        else:
            before = _range_value(m, data, spec.before, spec.days_of_week, spec.hours)
            during = _range_value(m, data, spec.during, spec.days_of_week, spec.hours)
            after = (
                _range_value(m, data, spec.after, spec.days_of_week, spec.hours)
                if spec.after is not None
                else None
            )
        pc_bd = percent_change(before, during) if None not in (before, during) else None
        pc_da = percent_change(during, after) if None not in (during, after) else None
        pc_ba = percent_change(before, after) if None not in (before, after) else None
        is_pct = m.metric in PCT_METRICS
        rows.append(
            AssessmentRow(
                metric=m.metric,
                scope=m.scope.display,
                before=before,
                during=during,
                after=after,
                pc_before_during=pc_bd,
                pc_during_after=pc_da,
                pc_before_after=pc_ba,
                halo=_halo(m.direction, before, during, after),
                pp_before_during=(
                    during - before if is_pct and None not in (before, during) else None
                ),
                pp_during_after=(
                    after - during if is_pct and None not in (during, after) else None
                ),
                pp_before_after=(
                    after - before if is_pct and None not in (before, after) else None
                ),
            )
        )
    return rows


def _date_range_from_doc(raw: object, name: str) -> DateRange:
    if not isinstance(raw, Mapping) or "start" not in raw or "end" not in raw:
        raise ValidationError(f"{name} must be {{start, end}}")
    try:
        return DateRange(parse_date(str(raw["start"])), parse_date(str(raw["end"])))
    except ValueError as exc:
        raise ValidationError(f"{name}: {exc}") from None


def spec_from_doc(doc: Mapping) -> AssessmentSpec:
    """Builds an AssessmentSpec from a JSON document (API body or file).

    Expected shape: before/during {start, end}, optional after, optional
    dows and hours (strings or lists), and a non-empty metrics list of
    {metric, scope: {kind, members, label}, direction?, vehicle_class?}.
    """
    raw_metrics = doc.get("metrics")
    if not isinstance(raw_metrics, list) or not raw_metrics:
        raise ValidationError("metrics must be a non-empty list")
    metric_specs = []
    for i, raw in enumerate(raw_metrics):
        if not isinstance(raw, Mapping):
            raise ValidationError(f"metrics[{i}] must be an object")
        if "metric" not in raw or "scope" not in raw:
            raise ValidationError(f"metrics[{i}] needs metric and scope")
        scope_raw = raw["scope"]
        if not isinstance(scope_raw, Mapping) or "kind" not in scope_raw:
            raise ValidationError(f"metrics[{i}].scope must be {{kind, ...}}")
        members = scope_raw.get("members", [])
        if not isinstance(members, list):
            raise ValidationError(f"metrics[{i}].scope.members must be a list")
        scope = ScopeSpec(
            kind=str(scope_raw["kind"]),
            members=tuple(str(m) for m in members),
            label=str(scope_raw.get("label", "")),
        )
        try:
            direction = ImprovementDirection(raw.get("direction", "LowerIsBetter"))
        except ValueError:
            raise ValidationError(
                f"metrics[{i}].direction must be LowerIsBetter or HigherIsBetter"
            ) from None
        vclass_raw = raw.get("vehicle_class", "All")
        try:
            vclass = VehicleClass(vclass_raw)
        except ValueError:
            raise ValidationError(
                f"metrics[{i}].vehicle_class must be one of "
                f"{[c.value for c in VehicleClass]}"
            ) from None
        metric_specs.append(
            MetricSpec(
                metric=str(raw["metric"]),
                scope=scope,
                direction=direction,
                vehicle_class=vclass,
            )
        )
    if "before" not in doc or "during" not in doc:
        raise ValidationError("before and during periods are required")
    after_raw = doc.get("after")
    return AssessmentSpec(
        before=_date_range_from_doc(doc["before"], "before"),
        during=_date_range_from_doc(doc["during"], "during"),
        after=(
            _date_range_from_doc(after_raw, "after")
            if after_raw is not None
            else None
        ),
        metrics=tuple(metric_specs),
        days_of_week=coerce_dow_set(doc.get("dows")),
        hours=coerce_int_set(doc.get("hours"), "hours"),
    )


def _format_value(metric: str, value: float | None) -> str:
    if value is None:
        return ""
    if metric in RATIO_METRICS:
        return f"{value:.2f}"
    if metric in PCT_METRICS:
        return f"{value:.1f}"
    if metric in COUNT_METRICS and float(value).is_integer():
        return str(int(value))
    return f"{value:.2f}"


def serialize_assessment_csv(rows: Sequence[AssessmentRow]) -> str:
    """Display form: ratios at 2 decimals, percentages at 1, absent empty."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(ASSESSMENT_CSV_HEADER)
    for r in rows:
        w.writerow([
            r.metric, r.scope,
            _format_value(r.metric, r.before),
            _format_value(r.metric, r.during),
            _format_value(r.metric, r.after),
            "" if r.pc_before_during is None else f"{r.pc_before_during:.1f}",
            "" if r.pc_during_after is None else f"{r.pc_during_after:.1f}",
            "" if r.pc_before_after is None else f"{r.pc_before_after:.1f}",
            r.halo.value,
        ])
    return out.getvalue()
