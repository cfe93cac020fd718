"""Map matching, gap filling, site filtering, and route grouping tests."""

import random
from datetime import datetime, timedelta, timezone

import pytest

from cmvsafety import detours as dt
from cmvsafety.crashes import CrashAssignment
from cmvsafety.errors import NoPath, NoWaypointMatched
from cmvsafety.network import Segment, build_graph
from cmvsafety.records import (
    Direction,
    EnforcementSite,
    RoadClass,
    SiteKind,
    Trajectory,
    Waypoint,
)

UTC = timezone.utc
T0 = datetime(2024, 6, 11, 6, 0, tzinfo=UTC)

MAINLINE_LON = -77.72
BYPASS_LON = -77.70


def seg(sid, lat0, lat1, lon, successors=(), length=0.7):
    return Segment(
        id=sid, route_name="I-81", direction=Direction.N, county="Washington",
        road_class=RoadClass.INTERSTATE, length_miles=length, speed_limit_mph=65.0,
        geometry=((lat0, lon), (lat1, lon)), successors=tuple(successors),
    )


def bypass_graph():
    """M0..M4 mainline; A0,A1 bypass around M2 (longer than the mainline)."""
    return build_graph([
        seg("M0", 39.50, 39.51, MAINLINE_LON, ["M1"]),
        seg("M1", 39.51, 39.52, MAINLINE_LON, ["M2", "A0"]),
        seg("M2", 39.52, 39.53, MAINLINE_LON, ["M3"]),
        seg("M3", 39.53, 39.54, MAINLINE_LON, ["M4"]),
        seg("M4", 39.54, 39.55, MAINLINE_LON, []),
        seg("A0", 39.52, 39.525, BYPASS_LON, ["A1"], length=0.5),
        seg("A1", 39.525, 39.53, BYPASS_LON, ["M3"], length=0.5),
    ])


def site():
    return EnforcementSite(
        site_id="hagerstown", kind=SiteKind.TWIS, lat=39.525, lon=MAINLINE_LON,
        mainline_segment_ids=("M2",),
        bbox=(39.515, -77.75, 39.535, -77.67),
    )


def traj(trip_id, points, start=T0, step_s=60):
    wps = tuple(
        Waypoint(start + timedelta(seconds=i * step_s), lat, lon)
        for i, (lat, lon) in enumerate(points)
    )
    return Trajectory(trip_id, wps)


def mainline_points():
    return [
        (39.505, MAINLINE_LON), (39.518, MAINLINE_LON), (39.525, MAINLINE_LON),
        (39.532, MAINLINE_LON), (39.545, MAINLINE_LON),
    ]


def detour_points():
    return [
        (39.505, MAINLINE_LON), (39.522, BYPASS_LON), (39.528, BYPASS_LON),
        (39.545, MAINLINE_LON),
    ]


class TestMapMatch:
    def test_single_segment(self):
        g = bypass_graph()
        trip = dt.map_match(traj("T1", [(39.502, MAINLINE_LON), (39.508, MAINLINE_LON)]), g)
        assert trip.segment_sequence == ("M0",)
        assert trip.matched_fraction == 1.0

    def test_dedupes_consecutive(self):
        g = bypass_graph()
        points = [
            (39.502, MAINLINE_LON), (39.506, MAINLINE_LON),
            (39.512, MAINLINE_LON), (39.518, MAINLINE_LON),
        ]
        trip = dt.map_match(traj("T1", points), g)
        assert trip.segment_sequence == ("M0", "M1")

    def test_unmatched_lower_fraction(self):
        g = bypass_graph()
        points = mainline_points() + [(39.60, -77.5), (39.61, -77.5)]
        trip = dt.map_match(traj("T1", points), g)
        assert trip.matched_fraction == pytest.approx(5 / 7)

    def test_nothing_matched(self):
        g = bypass_graph()
        with pytest.raises(NoWaypointMatched):
            dt.map_match(traj("T1", [(39.9, -76.0), (39.91, -76.0)]), g)

    def test_heading_gate(self):
        g = bypass_graph()
        wps = (
            Waypoint(T0, 39.505, MAINLINE_LON, 180.0),  # southbound: no candidate
            Waypoint(T0 + timedelta(minutes=1), 39.508, MAINLINE_LON, 0.0),
        )
        trip = dt.map_match(Trajectory("T1", wps), g)
        assert trip.matched_fraction == 0.5
        assert trip.segment_sequence == ("M0",)


class TestFillGaps:
    def test_already_contiguous(self):
        g = bypass_graph()
        assert dt.fill_gaps(["M0", "M1"], g) == ["M0", "M1"]

    def test_single_gap(self):
        g = bypass_graph()
        assert dt.fill_gaps(["M0", "M2"], g) == ["M0", "M1", "M2"]

    def test_unreachable(self):
        g = build_graph([
            seg("M0", 39.50, 39.51, MAINLINE_LON),
            seg("X", 39.60, 39.61, MAINLINE_LON),
        ])
        with pytest.raises(NoPath):
            dt.fill_gaps(["M0", "X"], g)

    def test_random_contiguity_and_subsequence(self):
        g = bypass_graph()
        ids = list(g.segments)
        rng = random.Random(42)
        checked = 0
        for _ in range(300):
            raw = [rng.choice(ids) for _ in range(rng.randint(1, 5))]
            dedup = [raw[0]] + [x for a, x in zip(raw, raw[1:]) if x != a]
            try:
                filled = dt.fill_gaps(dedup, g)
            except NoPath:
                continue
            checked += 1
            for u, v in zip(filled, filled[1:]):
                assert v in g.successors(u)
            it = iter(filled)
            assert all(x in it for x in dedup)  # subsequence
        assert checked > 50


class TestTripsAtSite:
    def test_through_trip_kept(self):
        g = bypass_graph()
        trips = [dt.match_and_fill(traj("T1", mainline_points()), g)]
        assert len(dt.trips_at_site(trips, site())) == 1

    def test_fully_outside_excluded(self):
        g = bypass_graph()
        trips = [dt.match_and_fill(
            traj("T1", [(39.502, MAINLINE_LON), (39.508, MAINLINE_LON)]), g
        )]
        assert dt.trips_at_site(trips, site()) == []

    def test_originating_inside_excluded(self):
        g = bypass_graph()
        points = [(39.52, MAINLINE_LON), (39.532, MAINLINE_LON), (39.545, MAINLINE_LON)]
        trips = [dt.match_and_fill(traj("T1", points), g)]
        assert dt.trips_at_site(trips, site()) == []

    def test_ending_inside_excluded(self):
        g = bypass_graph()
        points = [(39.505, MAINLINE_LON), (39.518, MAINLINE_LON), (39.525, MAINLINE_LON)]
        trips = [dt.match_and_fill(traj("T1", points), g)]
        assert dt.trips_at_site(trips, site()) == []


class TestClassify:
    def test_mainline(self):
        g = bypass_graph()
        trip = dt.match_and_fill(traj("T1", mainline_points()), g)
        assert dt.classify_trip(trip, site()) is dt.TripClass.MAINLINE
        assert "M2" in trip.segment_sequence

    def test_detour(self):
        g = bypass_graph()
        trip = dt.match_and_fill(traj("T1", detour_points()), g)
        assert trip.segment_sequence == ("M0", "M1", "A0", "A1", "M3", "M4")
        assert dt.classify_trip(trip, site()) is dt.TripClass.DETOUR

    def test_partition(self):
        g = bypass_graph()
        trips = [
            dt.match_and_fill(traj(f"T{i}", mainline_points()), g) for i in range(3)
        ] + [
            dt.match_and_fill(traj(f"D{i}", detour_points()), g) for i in range(2)
        ]
        at_site = dt.trips_at_site(trips, site())
        classes = [dt.classify_trip(t, site()) for t in at_site]
        assert len(at_site) == 5
        assert classes.count(dt.TripClass.MAINLINE) == 3
        assert classes.count(dt.TripClass.DETOUR) == 2


class TestRouteTable:
    def test_no_detours_empty(self):
        g = bypass_graph()
        trips = [dt.match_and_fill(traj("T1", mainline_points()), g)]
        assert dt.detour_route_table(trips, site(), g) == []

    def test_grouping_and_order(self):
        g = bypass_graph()
        trips = [
            dt.match_and_fill(traj(f"D{i}", detour_points()), g) for i in range(3)
        ]
        rows = dt.detour_route_table(trips, site(), g)
        assert len(rows) == 1
        row = rows[0]
        assert row.route_key == "M0>M1>A0>A1>M3>M4"
        assert row.trip_count == 3
        assert row.total_length_miles == pytest.approx(0.7 * 4 + 0.5 * 2)

    def test_travel_time_in_box_portion(self):
        g = bypass_graph()
        # Waypoints a minute apart; inside-box points are indexes 1 and 2.
        trips = [dt.match_and_fill(traj("D1", detour_points(), step_s=60), g)]
        rows = dt.detour_route_table(trips, site(), g)
        assert rows[0].avg_travel_time_min == pytest.approx(1.0)

    def test_crash_counts_on_route(self):
        g = bypass_graph()
        trips = [dt.match_and_fill(traj("D1", detour_points()), g)]
        assignments = [
            CrashAssignment("R1", "A0", 0.1),
            CrashAssignment("R2", "M2", 0.1),  # not on the detour route
            CrashAssignment("R3", None, None),
        ]
        rows = dt.detour_route_table(trips, site(), g, assignments)
        assert rows[0].crash_count == 1

    def test_low_quality_dropped(self):
        g = bypass_graph()
        noisy = detour_points() + [(39.9, -76.0)] * 5  # 4 matched of 9
        trips = [dt.match_and_fill(traj("D1", noisy), g)]
        assert trips[0].matched_fraction < 0.5
        assert dt.detour_route_table(trips, site(), g) == []

    def test_csv_shape(self):
        g = bypass_graph()
        trips = [dt.match_and_fill(traj("D1", detour_points()), g)]
        text = dt.serialize_route_table_csv(dt.detour_route_table(trips, site(), g))
        lines = text.strip().split("\n")
        assert lines[0] == "route_key,trip_count,avg_travel_time_min,total_length_miles,crash_count"
        assert lines[1].startswith("M0>M1>A0>A1>M3>M4,1,")


class TestMatchTrips:
    def test_skips_logged(self):
        g = bypass_graph()
        trajectories = [
            traj("OK", mainline_points()),
            traj("LOST", [(39.9, -76.0), (39.91, -76.0)]),
        ]
        trips, skipped = dt.match_trips(trajectories, g)
        assert [t.trip_id for t in trips] == ["OK"]
        assert skipped == {"LOST": "no_waypoint_matched"}
