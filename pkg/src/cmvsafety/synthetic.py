"""Deterministic synthetic corridor generator.

Builds a complete dataset bundle around a single north-south corridor
with one enforcement site mid-chain and two signed bypass routes, so
end-to-end behavior (matching, classification, rollups, data gaps) can
be checked against counts that were planted on purpose.

Everything derives from one seeded RNG: the same config yields
byte-identical bundles.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone

import numpy as np

from .errors import InvalidConfig
from .geokernel import polyline_length_m
from .ingest import DatasetBundle
from .network import METERS_PER_MILE, Segment
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
from .timeutil import DateRange

UTC = timezone.utc

BASE_LAT = 39.30
BASE_LON = -77.72
BYPASS_A_LON = -77.70
BYPASS_B_LON = -77.74
LAT_STEP = 0.01  # per mainline segment, about 0.69 miles

SITE_ID = "site-1"
ROUTE_A_IDS = ("A000", "A001")
ROUTE_B_IDS = ("B000", "B001", "B002")
ROUTE_A_SHARE = 0.7

# Waypoint jitter stays well inside the 50 m match radius.
_JITTER_DEG = 0.0001


@dataclass(frozen=True)
class SyntheticConfig:
    seed: int = 20240600
    n_segments: int = 15  # mainline chain length
    n_days: int = 12
    n_trips: int = 600  # through trips past the site
    detour_fraction: float = 0.2
    missing_fraction: float = 0.0
    enforcement_speed_delta_mph: float = 2.0
    speed_limit_mph: float = 65.0
    start_date: date = date(2024, 6, 3)

    def __post_init__(self) -> None:
        if self.n_segments < 7:
            raise InvalidConfig("n_segments must be at least 7")
        if self.n_days < 3:
            raise InvalidConfig("n_days must be at least 3")
        if self.n_trips < 0:
            raise InvalidConfig("n_trips must be nonnegative")
        for name in ("detour_fraction", "missing_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1]")
        if self.enforcement_speed_delta_mph < 0:
            raise InvalidConfig("enforcement_speed_delta_mph must be nonnegative")
        if self.speed_limit_mph <= 0:
            raise InvalidConfig("speed_limit_mph must be positive")

    @property
    def mid(self) -> int:
        return self.n_segments // 2

    def mainline_id(self, i: int) -> str:
        return f"M{i:03d}"

    @property
    def site_segment_id(self) -> str:
        return self.mainline_id(self.mid)

    def periods(self) -> tuple[DateRange, DateRange, DateRange]:
        """Before / enforcement / after thirds of the generated days."""
        third = self.n_days // 3
        d0 = self.start_date
        before = DateRange(d0, d0 + timedelta(days=third - 1))
        during = DateRange(
            d0 + timedelta(days=third), d0 + timedelta(days=2 * third - 1)
        )
        after = DateRange(
            d0 + timedelta(days=2 * third), d0 + timedelta(days=self.n_days - 1)
        )
        return before, during, after

    def site_bbox(self) -> tuple[float, float, float, float]:
        lat = BASE_LAT + LAT_STEP * self.mid + LAT_STEP / 2
        return (lat - 0.02, BASE_LON - 0.05, lat + 0.02, BASE_LON + 0.05)


def planted_detour_counts(config: SyntheticConfig) -> tuple[int, int, int]:
    """(mainline trips, route-A trips, route-B trips) the generator plants."""
    n_detour = round(config.detour_fraction * config.n_trips)
    n_a = round(ROUTE_A_SHARE * n_detour)
    return config.n_trips - n_detour, n_a, n_detour - n_a


def _segment(
    sid: str, points: tuple[tuple[float, float], ...], limit: float,
    successors: tuple[str, ...],
) -> Segment:
    lats = np.array([p[0] for p in points], dtype=np.float64)
    lons = np.array([p[1] for p in points], dtype=np.float64)
    length = polyline_length_m(lats, lons) / METERS_PER_MILE
    return Segment(
        id=sid,
        route_name="SYN-1",
        direction=Direction.N,
        county="Synthville",
        road_class=RoadClass.INTERSTATE,
        length_miles=length,
        speed_limit_mph=limit,
        geometry=points,
        successors=successors,
    )


def _build_segments(config: SyntheticConfig) -> list[Segment]:
    n, mid = config.n_segments, config.mid
    limit = config.speed_limit_mph
    lat = lambda i: BASE_LAT + LAT_STEP * i

    segments = []
    for i in range(n):
        sid = config.mainline_id(i)
        succ: tuple[str, ...]
        if i == n - 1:
            succ = ()
        elif i == mid - 1:
            # The split point: mainline continues, both bypasses open here.
            succ = (config.mainline_id(mid), ROUTE_A_IDS[0], ROUTE_B_IDS[0])
        else:
            succ = (config.mainline_id(i + 1),)
        segments.append(
            _segment(
                sid,
                ((lat(i), BASE_LON), (lat(i + 1), BASE_LON)),
                limit,
                succ,
            )
        )

    rejoin = config.mainline_id(mid + 1)
    lo, hi = lat(mid), lat(mid + 1)
    half = (lo + hi) / 2
    segments.append(
        _segment(ROUTE_A_IDS[0], ((lo, BYPASS_A_LON), (half, BYPASS_A_LON)),
                 limit, (ROUTE_A_IDS[1],))
    )
    segments.append(
        _segment(ROUTE_A_IDS[1], ((half, BYPASS_A_LON), (hi, BYPASS_A_LON)),
                 limit, (rejoin,))
    )
    third1 = lo + (hi - lo) / 3
    third2 = lo + 2 * (hi - lo) / 3
    segments.append(
        _segment(ROUTE_B_IDS[0], ((lo, BYPASS_B_LON), (third1, BYPASS_B_LON)),
                 limit, (ROUTE_B_IDS[1],))
    )
    segments.append(
        _segment(ROUTE_B_IDS[1], ((third1, BYPASS_B_LON), (third2, BYPASS_B_LON)),
                 limit, (ROUTE_B_IDS[2],))
    )
    segments.append(
        _segment(ROUTE_B_IDS[2], ((third2, BYPASS_B_LON), (hi, BYPASS_B_LON)),
                 limit, (rejoin,))
    )
    return segments


def _segment_midpoint(seg: Segment) -> tuple[float, float]:
    (a_lat, a_lon), (b_lat, b_lon) = seg.geometry[0], seg.geometry[-1]
    return (a_lat + b_lat) / 2, (a_lon + b_lon) / 2


def _probe_records(
    config: SyntheticConfig, segments: list[Segment], rng: random.Random
) -> list[ProbeSpeedRecord]:
    """Three 5-minute epochs in every (segment, day, hour) cell, minus an
    exact planted share of cells left dark."""
    days = [config.start_date + timedelta(days=i) for i in range(config.n_days)]
    cells = [
        (seg.id, day, hour)
        for seg in segments
        for day in days
        for hour in range(24)
    ]
    n_missing = round(config.missing_fraction * len(cells))
    missing = set(rng.sample(cells, n_missing)) if n_missing else set()

    _, during, _ = config.periods()
    mid = config.mid
    slowdown_ids = {
        config.mainline_id(i)
        for i in (mid - 1, mid, mid + 1)
        if 0 <= i < config.n_segments
    }

    records = []
    for sid, day, hour in cells:
        if (sid, day, hour) in missing:
            continue
        mean = config.speed_limit_mph + 1.0
        if sid in slowdown_ids and day in during:
            mean -= config.enforcement_speed_delta_mph
        for minute in (0, 5, 10):
            speed = min(95.0, max(5.0, rng.gauss(mean, 3.0)))
            records.append(
                ProbeSpeedRecord(
                    segment_id=sid,
                    epoch_start=datetime.combine(
                        day, time(hour, minute), tzinfo=UTC
                    ),
                    vehicle_class=VehicleClass.ALL,
                    speed_mph=speed,
                )
            )
    return records


def _trip(
    trip_id: str,
    route_segments: list[Segment],
    start: datetime,
    rng: random.Random,
) -> Trajectory:
    waypoints = []
    stamp = start
    for seg in route_segments:
        lat, lon = _segment_midpoint(seg)
        waypoints.append(
            Waypoint(
                timestamp=stamp,
                lat=lat + rng.uniform(-_JITTER_DEG, _JITTER_DEG),
                lon=lon + rng.uniform(-_JITTER_DEG, _JITTER_DEG),
                heading_deg=rng.uniform(0.0, 10.0),
            )
        )
        stamp += timedelta(seconds=30)
    return Trajectory(trip_id=trip_id, waypoints=tuple(waypoints))


def _trajectories(
    config: SyntheticConfig, segments: list[Segment], rng: random.Random
) -> list[Trajectory]:
    by_id = {s.id: s for s in segments}
    mid, n = config.mid, config.n_segments
    mainline_route = [by_id[config.mainline_id(i)] for i in range(n)]
    prefix = mainline_route[:mid]
    suffix = mainline_route[mid + 1:]
    route_a = prefix + [by_id[s] for s in ROUTE_A_IDS] + suffix
    route_b = prefix + [by_id[s] for s in ROUTE_B_IDS] + suffix

    n_mainline, n_a, n_b = planted_detour_counts(config)
    plan = (
        [mainline_route] * n_mainline + [route_a] * n_a + [route_b] * n_b
    )
    rng.shuffle(plan)

    days = [config.start_date + timedelta(days=i) for i in range(config.n_days)]
    trips = []
    for i, route in enumerate(plan):
        day = days[i % len(days)]
        start = datetime.combine(day, time(8, 0), tzinfo=UTC) + timedelta(
            minutes=i // len(days) * 20
        )
        trips.append(_trip(f"T{i:06d}", route, start, rng))

    # A few local runs that begin inside the site box; the through-trip
    # rule must screen these out.
    for j in range(config.n_trips // 50):
        day = days[j % len(days)]
        start = datetime.combine(day, time(20, 0), tzinfo=UTC) + timedelta(
            minutes=j * 7
        )
        trips.append(_trip(f"L{j:04d}", mainline_route[mid:], start, rng))
    return trips


def _crashes(
    config: SyntheticConfig, segments: list[Segment], rng: random.Random
) -> list[CrashRecord]:
    days = config.n_days
    crashes = []
    for k in range(max(3, days * 2)):
        seg = segments[rng.randrange(len(segments))]
        lat, lon = _segment_midpoint(seg)
        day = config.start_date + timedelta(days=rng.randrange(days))
        crashes.append(
            CrashRecord(
                report_number=f"CR{k:05d}",
                timestamp=datetime.combine(
                    day, time(rng.randrange(24), rng.randrange(60)), tzinfo=UTC
                ),
                lat=lat + rng.uniform(-_JITTER_DEG, _JITTER_DEG),
                lon=lon + rng.uniform(-_JITTER_DEG, _JITTER_DEG),
                severity=rng.choice(
                    [Severity.PROPERTY_DAMAGE, Severity.INJURY, Severity.FATAL]
                ),
                cmv_involved=rng.random() < 0.4,
                direction_hint=Direction.N,
            )
        )
    return crashes


def _vws(config: SyntheticConfig, rng: random.Random) -> list[VwsRecord]:
    records = []
    for station in ("VWS-N", "VWS-S"):
        for i in range(config.n_days):
            day = config.start_date + timedelta(days=i)
            for k in range(40):
                flagged = rng.random() < 0.08
                violations = (
                    frozenset({rng.choice(list(VwsViolationCategory))})
                    if flagged
                    else frozenset()
                )
                records.append(
                    VwsRecord(
                        station_id=station,
                        timestamp=datetime.combine(
                            day, time(5 + k % 16, (k * 7) % 60), tzinfo=UTC
                        ),
                        fhwa_class=rng.randrange(4, 14),
                        gross_weight_lb=rng.uniform(18000, 92000),
                        speed_mph=rng.uniform(50, 75),
                        length_ft=rng.uniform(40, 75),
                        violations=violations,
                    )
                )
    return records


def _fmcsa(config: SyntheticConfig, rng: random.Random) -> list[FmcsaDailyRecord]:
    records = []
    for i in range(config.n_days):
        maintenance = rng.randrange(60, 120)
        unsafe = rng.randrange(30, 90)
        records.append(
            FmcsaDailyRecord(
                date=config.start_date + timedelta(days=i),
                inspections=rng.randrange(200, 360),
                violations_by_category={
                    FmcsaCategory.VEHICLE_MAINTENANCE: maintenance,
                    FmcsaCategory.UNSAFE_DRIVING: unsafe,
                },
                oos_count=rng.randrange(0, maintenance + unsafe),
            )
        )
    return records


def generate_synthetic(config: SyntheticConfig) -> DatasetBundle:
    rng = random.Random(config.seed)
    segments = _build_segments(config)
    site_lat = BASE_LAT + LAT_STEP * config.mid + LAT_STEP / 2
    site = EnforcementSite(
        site_id=SITE_ID,
        kind=SiteKind.TWIS,
        lat=site_lat,
        lon=BASE_LON,
        mainline_segment_ids=(config.site_segment_id,),
        bbox=config.site_bbox(),
    )
    initiative = [
        SiteInitiativeRecord(SITE_ID, label, rng.randrange(40, 80), rng.randrange(30, 150))
        for label in (PeriodLabel.BEFORE, PeriodLabel.ENFORCEMENT, PeriodLabel.AFTER)
    ]
    return DatasetBundle(
        segments=segments,
        probe=_probe_records(config, segments, rng),
        crashes=_crashes(config, segments, rng),
        trajectories=_trajectories(config, segments, rng),
        vws=_vws(config, rng),
        fmcsa=_fmcsa(config, rng),
        sites=[site],
        site_initiative=initiative,
    )
