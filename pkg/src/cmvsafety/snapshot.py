"""Immutable analysis builds and the holder that swaps them.

A snapshot is everything the service reads: the network, hourly
aggregates, reference speeds, crash assignments, matched trips, and
per-site route tables, all derived once from a data directory. Requests
take one snapshot reference up front and answer entirely from it, so a
concurrent rebuild can never mix two builds inside one response.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from .assessment import AnalyticsData
from .crashes import (
    DEFAULT_CONFLATION_RADIUS_M,
    CrashAssignment,
    conflate_crashes,
)
from .detours import (
    DEFAULT_MATCH_RADIUS_M,
    DEFAULT_MIN_MATCHED_FRACTION,
    DetourRoute,
    MatchedTrip,
    TripClass,
    classify_trip,
    detour_route_table,
    match_trips,
    trips_at_site,
)
from .errors import InvalidConfig
from .ingest import BUNDLE_FILES, DatasetBundle, load_data_dir
from .network import SegmentGraph, build_graph
from .records import EnforcementSite
from .speed import (
    HourlyAggregate,
    ReferenceSpeed,
    aggregate_hourly,
    compute_all_reference_speeds,
)
from .timeutil import format_rfc3339


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str
    host: str = "127.0.0.1"
    port: int = 8570
    strict_ingest: bool = False
    local_utc_offset_hours: int = 0
    crash_radius_m: float = DEFAULT_CONFLATION_RADIUS_M
    match_radius_m: float = DEFAULT_MATCH_RADIUS_M
    min_matched_fraction: float = DEFAULT_MIN_MATCHED_FRACTION

    def __post_init__(self) -> None:
        if not self.data_dir:
            raise InvalidConfig("data_dir is required")
        if not 1 <= self.port <= 65535:
            raise InvalidConfig("port must be in 1..65535")
        if not -12 <= self.local_utc_offset_hours <= 14:
            raise InvalidConfig("local_utc_offset_hours must be in -12..14")
        for name in ("crash_radius_m", "match_radius_m"):
            if getattr(self, name) <= 0:
                raise InvalidConfig(f"{name} must be positive")
        if not 0.0 <= self.min_matched_fraction <= 1.0:
            raise InvalidConfig("min_matched_fraction must be in [0, 1]")

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise InvalidConfig("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from exc


@dataclass(frozen=True)
class BuildReport:
    """Row counts and drop counts from one build, for the meta endpoint."""

    segments: int
    probe_records: int
    crashes: int
    crashes_matched: int
    trajectories: int
    trips_matched: int
    trips_skipped: int
    vws_records: int
    fmcsa_days: int
    sites: int
    initiative_rows: int
    rejects_by_file: Mapping[str, int]
    build_ms: float


def _content_build_id(bundle: DatasetBundle) -> str:
    """Stable hash of the canonical serialization of every input table."""
    digest = hashlib.sha256()
    for filename, (_, serializer, attr) in sorted(BUNDLE_FILES.items()):
        digest.update(filename.encode())
        digest.update(serializer(getattr(bundle, attr)).encode())
    return digest.hexdigest()[:16]


@dataclass(frozen=True)
class Snapshot:
    build_id: str
    built_at: str  # RFC 3339, fixed for the life of the build
    config: ServiceConfig
    graph: SegmentGraph
    aggregates: tuple[HourlyAggregate, ...]
    reference_speeds: Mapping[tuple, ReferenceSpeed]
    crash_assignments: tuple[CrashAssignment, ...]
    trips: tuple[MatchedTrip, ...]
    skipped_trips: Mapping[str, str]
    sites: Mapping[str, EnforcementSite]
    route_tables: Mapping[str, tuple[DetourRoute, ...]]
    site_trip_counts: Mapping[str, Mapping[str, int]]
    bundle: DatasetBundle
    analytics: AnalyticsData
    report: BuildReport


def build_snapshot(config: ServiceConfig) -> Snapshot:
    started = time.perf_counter()
    if not Path(config.data_dir).is_dir():
        raise FileNotFoundError(2, "no such data directory", config.data_dir)
    bundle = load_data_dir(config.data_dir, strict=config.strict_ingest)
    return snapshot_from_bundle(bundle, config, started=started)


def snapshot_from_bundle(
    bundle: DatasetBundle,
    config: ServiceConfig,
    started: float | None = None,
) -> Snapshot:
    if started is None:
        started = time.perf_counter()
    graph = build_graph(bundle.segments)
    references = compute_all_reference_speeds(
        bundle.probe, local_utc_offset_hours=config.local_utc_offset_hours
    )
    aggregates = tuple(
        aggregate_hourly(bundle.probe, graph=graph, reference_speeds=references)
    )
    assignments = tuple(
        conflate_crashes(bundle.crashes, graph, radius_m=config.crash_radius_m)
    )
    trips, skipped = match_trips(
        bundle.trajectories, graph, radius_m=config.match_radius_m
    )
    trips = tuple(trips)

    sites = {site.site_id: site for site in bundle.sites}
    route_tables = {}
    site_trip_counts = {}
    for site_id in sorted(sites):
        site = sites[site_id]
        through = trips_at_site(trips, site)
        route_tables[site_id] = tuple(
            detour_route_table(
                through,
                site,
                graph,
                crash_assignments=assignments,
                min_matched_fraction=config.min_matched_fraction,
            )
        )
        n_detour = sum(
            1 for t in through if classify_trip(t, site) is TripClass.DETOUR
        )
        site_trip_counts[site_id] = {
            "through": len(through),
            "mainline": len(through) - n_detour,
            "detour": n_detour,
        }

    analytics = AnalyticsData(
        aggregates=aggregates,
        crashes=tuple(bundle.crashes),
        crash_assignments=assignments,
        vws=tuple(bundle.vws),
        fmcsa=tuple(bundle.fmcsa),
        site_initiative=tuple(bundle.site_initiative),
    )
    report = BuildReport(
        segments=len(bundle.segments),
        probe_records=len(bundle.probe),
        crashes=len(bundle.crashes),
        crashes_matched=sum(1 for a in assignments if a.matched),
        trajectories=len(bundle.trajectories),
        trips_matched=len(trips),
        trips_skipped=len(skipped),
        vws_records=len(bundle.vws),
        fmcsa_days=len(bundle.fmcsa),
        sites=len(bundle.sites),
        initiative_rows=len(bundle.site_initiative),
        rejects_by_file={
            name: len(errors) for name, errors in sorted(bundle.rejects.items())
        },
        build_ms=(time.perf_counter() - started) * 1000.0,
    )
    return Snapshot(
        build_id=_content_build_id(bundle),
        built_at=format_rfc3339(datetime.now(timezone.utc)),
        config=config,
        graph=graph,
        aggregates=aggregates,
        reference_speeds=references,
        crash_assignments=assignments,
        trips=trips,
        skipped_trips=dict(skipped),
        sites=sites,
        route_tables=route_tables,
        site_trip_counts=site_trip_counts,
        bundle=bundle,
        analytics=analytics,
        report=report,
    )


class SnapshotHolder:
    """Hands out one immutable snapshot at a time; swaps are atomic.

    Callers must take the reference once per request and keep using that
    object; the holder never mutates a snapshot in place.
    """

    def __init__(self, initial: Snapshot) -> None:
        self._lock = threading.Lock()
        self._current = initial

    def get(self) -> Snapshot:
        with self._lock:
            return self._current

    def swap(self, snapshot: Snapshot) -> Snapshot:
        """Installs the new build and returns the one it replaced."""
        with self._lock:
            old, self._current = self._current, snapshot
            return old
