"""Enforcement-avoidance detour detection.

Trajectories are map-matched waypoint-by-waypoint, gaps are filled with
shortest paths so every trip becomes a contiguous directed route, trips
passing a site's bounding box are split into mainline vs detour, and
detour trips aggregate into a per-route table.
"""

from __future__ import annotations

import csv
import enum
import io
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .crashes import CrashAssignment
from .errors import NoPath, NoWaypointMatched
from .network import SegmentGraph, nearest_segment, shortest_path
from .records import EnforcementSite, Trajectory, Waypoint

DEFAULT_MATCH_RADIUS_M = 50.0
DEFAULT_MIN_MATCHED_FRACTION = 0.5

ROUTE_TABLE_HEADER = [
    "route_key", "trip_count", "avg_travel_time_min", "total_length_miles",
    "crash_count",
]


class TripClass(str, enum.Enum):
    MAINLINE = "Mainline"
    DETOUR = "Detour"


@dataclass(frozen=True)
class MatchedTrip:
    """A trajectory matched onto the graph.

    segment_sequence is contiguous once fill_gaps has run (the pipeline
    always runs it); matched_fraction is the share of waypoints that
    found a segment, kept for quality screening. Raw waypoints ride along
    for bounding-box tests and travel-time measurement.
    """

    trip_id: str
    segment_sequence: tuple[str, ...]
    matched_fraction: float
    waypoints: tuple[Waypoint, ...]


@dataclass(frozen=True)
class DetourRoute:
    route_key: str
    trip_count: int
    avg_travel_time_min: float
    total_length_miles: float
    crash_count: int


def route_key_of(sequence: Sequence[str]) -> str:
    return ">".join(sequence)


def map_match(
    trajectory: Trajectory,
    graph: SegmentGraph,
    radius_m: float = DEFAULT_MATCH_RADIUS_M,
) -> MatchedTrip:
    """Nearest-segment match per waypoint, consecutive duplicates collapsed.

    Waypoint headings gate candidates when present. Unmatched waypoints
    are skipped and lower matched_fraction; the resulting sequence may
    still have gaps (fill_gaps restores contiguity).
    """
    matched_ids: list[str] = []
    n_matched = 0
    for wp in trajectory.waypoints:
        hit = nearest_segment(
            graph, wp.lat, wp.lon, heading=wp.heading_deg, radius_m=radius_m
        )
        if hit is None:
            continue
        n_matched += 1
        if not matched_ids or matched_ids[-1] != hit[0]:
            matched_ids.append(hit[0])
    if n_matched == 0:
        raise NoWaypointMatched(trajectory.trip_id)
    return MatchedTrip(
        trip_id=trajectory.trip_id,
        segment_sequence=tuple(matched_ids),
        matched_fraction=n_matched / len(trajectory.waypoints),
        waypoints=trajectory.waypoints,
    )


def fill_gaps(sequence: Sequence[str], graph: SegmentGraph) -> list[str]:
    """Make a matched sequence contiguous by splicing shortest paths.

    Every consecutive non-adjacent pair gets the interior of its shortest
    path inserted, so the input ids remain a subsequence of the output.
    """
    if not sequence:
        raise ValueError("fill_gaps needs a non-empty sequence")
    out = [sequence[0]]
    for nxt in sequence[1:]:
        prev = out[-1]
        if nxt in graph.successors(prev):
            out.append(nxt)
        else:
            out.extend(shortest_path(graph, prev, nxt)[1:])
    return out


def match_and_fill(
    trajectory: Trajectory,
    graph: SegmentGraph,
    radius_m: float = DEFAULT_MATCH_RADIUS_M,
) -> MatchedTrip:
    trip = map_match(trajectory, graph, radius_m)
    return replace(trip, segment_sequence=tuple(fill_gaps(trip.segment_sequence, graph)))


def match_trips(
    trajectories: Iterable[Trajectory],
    graph: SegmentGraph,
    radius_m: float = DEFAULT_MATCH_RADIUS_M,
) -> tuple[list[MatchedTrip], dict[str, str]]:
    """Match and fill every trajectory; skipped trips map to a reason."""
    trips: list[MatchedTrip] = []
    skipped: dict[str, str] = {}
    for trajectory in trajectories:
        try:
            trips.append(match_and_fill(trajectory, graph, radius_m))
        except NoWaypointMatched:
            skipped[trajectory.trip_id] = "no_waypoint_matched"
        except NoPath as exc:
            skipped[trajectory.trip_id] = f"no_path:{exc.from_id}>{exc.to_id}"
    return trips, skipped


def trips_at_site(trips: Iterable[MatchedTrip], site: EnforcementSite) -> list[MatchedTrip]:
    """Through-trips only: endpoints outside the box, at least one inside."""
    kept = []
    for trip in trips:
        first, last = trip.waypoints[0], trip.waypoints[-1]
        if site.contains(first.lat, first.lon) or site.contains(last.lat, last.lon):
            continue
        if any(site.contains(w.lat, w.lon) for w in trip.waypoints):
            kept.append(trip)
    return kept


def classify_trip(trip: MatchedTrip, site: EnforcementSite) -> TripClass:
    mainline = set(site.mainline_segment_ids)
    if any(sid in mainline for sid in trip.segment_sequence):
        return TripClass.MAINLINE
    return TripClass.DETOUR


def _in_box_minutes(trip: MatchedTrip, site: EnforcementSite) -> float:
    inside = [w for w in trip.waypoints if site.contains(w.lat, w.lon)]
    if len(inside) < 2:
        return 0.0
    span = inside[-1].timestamp - inside[0].timestamp
    return span.total_seconds() / 60.0


def detour_route_table(
    trips: Iterable[MatchedTrip],
    site: EnforcementSite,
    graph: SegmentGraph,
    crash_assignments: Sequence[CrashAssignment] = (),
    min_matched_fraction: float = DEFAULT_MIN_MATCHED_FRACTION,
) -> list[DetourRoute]:
    """Detour trips grouped by exact route, busiest first.

    Travel time is the in-box portion of each trip (last waypoint inside
    the box minus the first), averaged per route. Low-quality matches
    below min_matched_fraction are dropped. Crash counts tally the
    assignments landing on any member segment.
    """
    crashes_per_segment: dict[str, int] = defaultdict(int)
    for assignment in crash_assignments:
        if assignment.segment_id is not None:
            crashes_per_segment[assignment.segment_id] += 1

    groups: dict[tuple[str, ...], list[MatchedTrip]] = defaultdict(list)
    for trip in trips:
        if trip.matched_fraction < min_matched_fraction:
            continue
        if classify_trip(trip, site) is TripClass.DETOUR:
            groups[trip.segment_sequence].append(trip)

    rows = []
    for sequence, members in groups.items():
        times = [_in_box_minutes(t, site) for t in members]
        rows.append(
            DetourRoute(
                route_key=route_key_of(sequence),
                trip_count=len(members),
                avg_travel_time_min=sum(times) / len(times),
                total_length_miles=sum(
                    graph.get(sid).length_miles for sid in sequence
                ),
                crash_count=sum(crashes_per_segment.get(sid, 0) for sid in sequence),
            )
        )
    rows.sort(key=lambda r: (-r.trip_count, r.route_key))
    return rows


def serialize_route_table_csv(rows: Sequence[DetourRoute]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(ROUTE_TABLE_HEADER)
    for r in rows:
        w.writerow([
            r.route_key, r.trip_count, f"{r.avg_travel_time_min:.2f}",
            f"{r.total_length_miles:.2f}", r.crash_count,
        ])
    return out.getvalue()
