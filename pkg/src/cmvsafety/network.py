"""Directed road-segment network: build, conflate, locate, route.

The graph is immutable after build; nearest-segment lookups go through a
fixed-cell spatial grid and the geodesic kernels, so repeated queries are
deterministic and safe to run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from heapq import heappop, heappush
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import geokernel
from .errors import DanglingSuccessor, DuplicateId, NoPath, ValidationError
from .records import Direction, RoadClass

METERS_PER_MILE = 1609.344

# Grid cell edge in degrees latitude (~1.1 km); queries expand by the radius.
_CELL_DEG = 0.01
_M_PER_DEG_LAT = 111_132.0
_M_PER_DEG_LON_EQ = 111_320.0


@dataclass(frozen=True)
class Segment:
    """One directional road segment."""

    id: str
    route_name: str
    direction: Direction
    county: str
    road_class: RoadClass
    length_miles: float
    speed_limit_mph: float | None
    geometry: tuple[tuple[float, float], ...]  # (lat, lon) pairs
    successors: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.length_miles <= 0:
            raise ValidationError(f"segment {self.id!r}: length_miles must be > 0")
        if len(self.geometry) < 2:
            raise ValidationError(f"segment {self.id!r}: geometry needs >= 2 points")
        if self.speed_limit_mph is not None and self.speed_limit_mph <= 0:
            raise ValidationError(f"segment {self.id!r}: speed_limit_mph must be > 0")


@dataclass(frozen=True)
class SpeedLimitTable:
    """Per-segment posted limits; at most one row per segment id."""

    limits: Mapping[str, float]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float]]) -> "SpeedLimitTable":
        limits: dict[str, float] = {}
        for segment_id, limit in pairs:
            if segment_id in limits:
                raise DuplicateId(segment_id, "speed limit table")
            if limit <= 0:
                raise ValidationError(
                    f"speed limit for {segment_id!r} must be > 0, got {limit}"
                )
            limits[segment_id] = float(limit)
        return cls(limits)


@dataclass(frozen=True)
class LimitCoverage:
    matched: int
    unmatched: int


class SegmentGraph:
    """Immutable directed segment network with a spatial index."""

    def __init__(self, segments: Mapping[str, Segment]):
        self._segments: dict[str, Segment] = dict(segments)
        for seg in self._segments.values():
            for succ in seg.successors:
                if succ not in self._segments:
                    raise DanglingSuccessor(seg.id, succ)
        self._geom_lats: dict[str, np.ndarray] = {}
        self._geom_lons: dict[str, np.ndarray] = {}
        self._grid: dict[tuple[int, int], list[str]] = {}
        for sid, seg in self._segments.items():
            lats = np.ascontiguousarray([p[0] for p in seg.geometry], dtype=np.float64)
            lons = np.ascontiguousarray([p[1] for p in seg.geometry], dtype=np.float64)
            self._geom_lats[sid] = lats
            self._geom_lons[sid] = lons
            for cell in _cells_for_polyline(lats, lons):
                self._grid.setdefault(cell, []).append(sid)
        for ids in self._grid.values():
            ids.sort()

    @property
    def segments(self) -> Mapping[str, Segment]:
        return self._segments

    def __len__(self) -> int:
        return len(self._segments)

    def __contains__(self, segment_id: str) -> bool:
        return segment_id in self._segments

    def get(self, segment_id: str) -> Segment:
        return self._segments[segment_id]

    def successors(self, segment_id: str) -> tuple[str, ...]:
        return self._segments[segment_id].successors

    def geometry_arrays(self, segment_id: str) -> tuple[np.ndarray, np.ndarray]:
        return self._geom_lats[segment_id], self._geom_lons[segment_id]

    def speed_limit(self, segment_id: str) -> float | None:
        return self._segments[segment_id].speed_limit_mph

    def candidates_near(self, lat: float, lon: float, radius_m: float) -> list[str]:
        """Segment ids whose grid cells intersect the query box, sorted."""
        dlat = radius_m / _M_PER_DEG_LAT
        coslat = max(0.01, math.cos(math.radians(lat)))
        dlon = radius_m / (_M_PER_DEG_LON_EQ * coslat)
        lo_i = _cell_index(lat - dlat)
        hi_i = _cell_index(lat + dlat)
        lo_j = _cell_index(lon - dlon)
        hi_j = _cell_index(lon + dlon)
        found: set[str] = set()
        for i in range(lo_i, hi_i + 1):
            for j in range(lo_j, hi_j + 1):
                found.update(self._grid.get((i, j), ()))
        return sorted(found)


def _cell_index(value: float) -> int:
    return int(math.floor(value / _CELL_DEG))


def _cells_for_polyline(lats: np.ndarray, lons: np.ndarray):
    cells: set[tuple[int, int]] = set()
    for k in range(len(lats) - 1):
        lo_i = _cell_index(min(lats[k], lats[k + 1]))
        hi_i = _cell_index(max(lats[k], lats[k + 1]))
        lo_j = _cell_index(min(lons[k], lons[k + 1]))
        hi_j = _cell_index(max(lons[k], lons[k + 1]))
        for i in range(lo_i, hi_i + 1):
            for j in range(lo_j, hi_j + 1):
                cells.add((i, j))
    return cells


def build_graph(segment_rows: Sequence[Segment]) -> SegmentGraph:
    """Validate ids and adjacency, returning the immutable graph."""
    segments: dict[str, Segment] = {}
    for seg in segment_rows:
        if seg.id in segments:
            raise DuplicateId(seg.id, "segment rows")
        segments[seg.id] = seg
    return SegmentGraph(segments)


def conflate_speed_limits(
    graph: SegmentGraph, limits: SpeedLimitTable
) -> tuple[SegmentGraph, LimitCoverage]:
    """Apply the table's limits by id join; geometry/adjacency untouched.

    Unmatched segments keep their limit absent; the coverage summary counts
    matched vs unmatched. Table rows for unknown segments are ignored.
    """
    matched = 0
    rows: list[Segment] = []
    for seg in graph.segments.values():
        limit = limits.limits.get(seg.id)
        if limit is not None:
            rows.append(replace(seg, speed_limit_mph=float(limit)))
            matched += 1
        else:
            rows.append(seg)
    coverage = LimitCoverage(matched=matched, unmatched=len(rows) - matched)
    return build_graph(rows), coverage


def _bearing_difference(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return 360.0 - d if d > 180.0 else d


def nearest_segment(
    graph: SegmentGraph,
    lat: float,
    lon: float,
    heading: float | None = None,
    radius_m: float = 100.0,
) -> tuple[str, float] | None:
    """Nearest segment within radius, or None.

    When a heading is given, candidates whose chord bearing at the
    projection point differs by more than 90 degrees are excluded before
    ranking. Ties on distance resolve to the ascending segment id; the
    returned offset is the along-geometry distance to the projection, in
    miles.
    """
    if radius_m <= 0:
        raise ValueError("radius_m must be > 0")
    best: tuple[str, float] | None = None
    best_dist = math.inf
    for sid in graph.candidates_near(lat, lon, radius_m):
        lats, lons = graph.geometry_arrays(sid)
        dist_m, offset_m, bearing = geokernel.project_point_polyline(lat, lon, lats, lons)
        if dist_m > radius_m:
            continue
        if heading is not None and _bearing_difference(bearing, heading) > 90.0:
            continue
        if dist_m < best_dist:
            best_dist = dist_m
            best = (sid, offset_m / METERS_PER_MILE)
    return best


def shortest_path(graph: SegmentGraph, from_id: str, to_id: str) -> list[str]:
    """Minimum-length directed path, inclusive of both endpoints.

    Cost is total length_miles over the path's segments. Equal-cost paths
    resolve to the lexicographically smallest id sequence, which Dijkstra
    delivers when labels are ordered by (cost, id sequence): all lengths
    are positive, so equal-cost paths are never prefixes of one another.
    """
    if from_id not in graph:
        raise KeyError(from_id)
    if to_id not in graph:
        raise KeyError(to_id)
    start_cost = graph.get(from_id).length_miles
    heap: list[tuple[float, tuple[str, ...]]] = [(start_cost, (from_id,))]
    done: set[str] = set()
    while heap:
        cost, path = heappop(heap)
        tail = path[-1]
        if tail in done:
            continue
        done.add(tail)
        if tail == to_id:
            return list(path)
        for succ in graph.successors(tail):
            if succ not in done:
                heappush(heap, (cost + graph.get(succ).length_miles, path + (succ,)))
    raise NoPath(from_id, to_id)


def path_length_miles(graph: SegmentGraph, path: Sequence[str]) -> float:
    return sum(graph.get(sid).length_miles for sid in path)
