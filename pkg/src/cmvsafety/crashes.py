"""Crash-to-segment conflation, severity summaries, and hotspot ranking."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError
from .filters import TemporalFilter
from .network import SegmentGraph, nearest_segment
from .records import CrashRecord, Direction, Severity

DEFAULT_CONFLATION_RADIUS_M = 100.0

# Compass heading equivalent of a directional hint.
_HINT_HEADING = {
    Direction.N: 0.0,
    Direction.E: 90.0,
    Direction.S: 180.0,
    Direction.W: 270.0,
}

HOTSPOT_SORT_KEYS = ("crash_count", "fatal_count", "cmv_crash_count")


@dataclass(frozen=True)
class CrashAssignment:
    """Where a crash landed on the network; segment_id None means unmatched."""

    report_number: str
    segment_id: str | None
    offset_miles: float | None

    @property
    def matched(self) -> bool:
        return self.segment_id is not None


@dataclass(frozen=True)
class CrashSummary:
    """Severity-by-class tally; the CMV column is a subset of the All column."""

    total_all: int
    total_cmv: int
    by_severity: Mapping[Severity, tuple[int, int]]  # (all, cmv)


@dataclass(frozen=True)
class HotspotRow:
    segment_id: str
    crash_count: int
    fatal_count: int
    cmv_crash_count: int
    rank: int


def conflate_crashes(
    crashes: Iterable[CrashRecord],
    graph: SegmentGraph,
    radius_m: float = DEFAULT_CONFLATION_RADIUS_M,
) -> list[CrashAssignment]:
    """Assign each crash to its nearest segment within radius.

    A direction hint becomes a heading filter, so among equidistant
    candidates only segments running the hinted way survive. Crashes with
    no candidate stay unmatched rather than erroring.
    """
    out = []
    for crash in crashes:
        heading = _HINT_HEADING.get(crash.direction_hint) if crash.direction_hint else None
        hit = nearest_segment(graph, crash.lat, crash.lon, heading=heading, radius_m=radius_m)
        if hit is None:
            out.append(CrashAssignment(crash.report_number, None, None))
        else:
            out.append(CrashAssignment(crash.report_number, hit[0], hit[1]))
    return out


def _filtered(
    crashes: Iterable[CrashRecord],
    assignment_by_report: Mapping[str, CrashAssignment],
    segment_ids: set[str] | None,
    temporal: TemporalFilter | None,
) -> list[CrashRecord]:
    kept = []
    for crash in crashes:
        if temporal is not None and not temporal.matches_dt(crash.timestamp):
            continue
        if segment_ids is not None:
            assignment = assignment_by_report.get(crash.report_number)
            if assignment is None or assignment.segment_id not in segment_ids:
                continue
        kept.append(crash)
    return kept


def crash_summary(
    assignments: Sequence[CrashAssignment],
    crashes: Sequence[CrashRecord],
    segment_ids: Iterable[str] | None = None,
    temporal: TemporalFilter | None = None,
) -> CrashSummary:
    """Counts by severity and CMV involvement over the filtered crashes.

    segment_ids None means no spatial filter: every crash counts, matched
    or not. A set restricts to crashes assigned to those segments.
    """
    by_report = {a.report_number: a for a in assignments}
    segset = set(segment_ids) if segment_ids is not None else None
    kept = _filtered(crashes, by_report, segset, temporal)
    by_severity: dict[Severity, list[int]] = {s: [0, 0] for s in Severity}
    total_cmv = 0
    for crash in kept:
        by_severity[crash.severity][0] += 1
        if crash.cmv_involved:
            by_severity[crash.severity][1] += 1
            total_cmv += 1
    return CrashSummary(
        total_all=len(kept),
        total_cmv=total_cmv,
        by_severity={s: (c[0], c[1]) for s, c in by_severity.items()},
    )


def hotspot_rank(
    assignments: Sequence[CrashAssignment],
    crashes: Sequence[CrashRecord],
    temporal: TemporalFilter | None = None,
    top_k: int = 10,
    sort_key: str = "crash_count",
) -> list[HotspotRow]:
    """Segments ranked by descending sort_key; ties break on ascending id."""
    if sort_key not in HOTSPOT_SORT_KEYS:
        raise ValidationError(f"sort_key must be one of {HOTSPOT_SORT_KEYS}")
    if top_k < 0:
        raise ValidationError("top_k must be >= 0")
    by_report = {a.report_number: a for a in assignments}
    tallies: dict[str, dict[str, int]] = defaultdict(
        lambda: {"crash_count": 0, "fatal_count": 0, "cmv_crash_count": 0}
    )
    for crash in crashes:
        if temporal is not None and not temporal.matches_dt(crash.timestamp):
            continue
        assignment = by_report.get(crash.report_number)
        if assignment is None or assignment.segment_id is None:
            continue
        cell = tallies[assignment.segment_id]
        cell["crash_count"] += 1
        if crash.severity == Severity.FATAL:
            cell["fatal_count"] += 1
        if crash.cmv_involved:
            cell["cmv_crash_count"] += 1
    ordered = sorted(tallies.items(), key=lambda kv: (-kv[1][sort_key], kv[0]))
    return [
        HotspotRow(
            segment_id=sid,
            crash_count=cell["crash_count"],
            fatal_count=cell["fatal_count"],
            cmv_crash_count=cell["cmv_crash_count"],
            rank=i + 1,
        )
        for i, (sid, cell) in enumerate(ordered[:top_k])
    ]
