"""Planted-effect checks for the synthetic corridor generator."""

from __future__ import annotations

import pytest

from cmvsafety.detours import (
    TripClass,
    classify_trip,
    detour_route_table,
    match_trips,
    route_key_of,
    trips_at_site,
)
from cmvsafety.errors import InvalidConfig
from cmvsafety.ingest import (
    serialize_probe_csv,
    serialize_segments_csv,
    serialize_trajectory_csv,
)
from cmvsafety.network import build_graph
from cmvsafety.records import VehicleClass
from cmvsafety.speed import aggregate_hourly, missing_rate
from cmvsafety.synthetic import (
    ROUTE_A_IDS,
    ROUTE_B_IDS,
    SITE_ID,
    SyntheticConfig,
    generate_synthetic,
    planted_detour_counts,
)
from cmvsafety.timeutil import DateRange


def small_config(**overrides):
    defaults = dict(
        seed=77,
        n_segments=9,
        n_days=3,
        n_trips=40,
        detour_fraction=0.25,
        missing_fraction=0.0,
    )
    defaults.update(overrides)
    return SyntheticConfig(**defaults)


class TestConfigValidation:
    def test_chain_too_short(self):
        with pytest.raises(InvalidConfig):
            SyntheticConfig(n_segments=6)

    def test_too_few_days(self):
        with pytest.raises(InvalidConfig):
            SyntheticConfig(n_days=2)

    def test_fraction_out_of_range(self):
        with pytest.raises(InvalidConfig):
            SyntheticConfig(detour_fraction=1.2)
        with pytest.raises(InvalidConfig):
            SyntheticConfig(missing_fraction=-0.1)

    def test_negative_trips(self):
        with pytest.raises(InvalidConfig):
            SyntheticConfig(n_trips=-1)

    def test_negative_delta(self):
        with pytest.raises(InvalidConfig):
            SyntheticConfig(enforcement_speed_delta_mph=-1.0)


class TestDeterminism:
    def test_same_seed_same_bytes(self):
        a = generate_synthetic(small_config())
        b = generate_synthetic(small_config())
        assert serialize_segments_csv(a.segments) == serialize_segments_csv(b.segments)
        assert serialize_probe_csv(a.probe) == serialize_probe_csv(b.probe)
        assert serialize_trajectory_csv(a.trajectories) == serialize_trajectory_csv(
            b.trajectories
        )

    def test_different_seed_differs(self):
        a = generate_synthetic(small_config(seed=1))
        b = generate_synthetic(small_config(seed=2))
        assert serialize_probe_csv(a.probe) != serialize_probe_csv(b.probe)


class TestNetworkShape:
    def test_graph_builds_and_routes_exist(self):
        config = small_config()
        bundle = generate_synthetic(config)
        graph = build_graph(bundle.segments)
        assert len(graph) == config.n_segments + 5
        split = config.mainline_id(config.mid - 1)
        assert set(graph.successors(split)) == {
            config.site_segment_id, ROUTE_A_IDS[0], ROUTE_B_IDS[0]
        }

    def test_site_covers_bypasses(self):
        bundle = generate_synthetic(small_config())
        (site,) = bundle.sites
        graph = build_graph(bundle.segments)
        for sid in ROUTE_A_IDS + ROUTE_B_IDS:
            for lat, lon in graph.get(sid).geometry:
                assert site.contains(lat, lon)


class TestMissingData:
    @pytest.mark.parametrize("fraction,expected", [
        (0.0, 0.0), (0.25, 25.0), (0.5, 50.0), (1.0, 100.0),
    ])
    def test_planted_gap_share_recovered(self, fraction, expected):
        config = small_config(n_trips=0, missing_fraction=fraction)
        bundle = generate_synthetic(config)
        aggs = aggregate_hourly(bundle.probe)
        segment_ids = [s.id for s in bundle.segments]
        period = DateRange(config.start_date, config.periods()[2].end)
        rate = missing_rate(aggs, segment_ids, period, VehicleClass.ALL)
        assert rate == expected


@pytest.fixture(scope="module")
def matched():
    config = small_config()
    bundle = generate_synthetic(config)
    graph = build_graph(bundle.segments)
    trips, skipped = match_trips(bundle.trajectories, graph)
    return config, bundle, graph, trips, skipped


class TestPlantedTrips:
    def test_everything_matches(self, matched):
        config, bundle, _, trips, skipped = matched
        assert skipped == {}
        assert len(trips) == len(bundle.trajectories)

    def test_through_trip_screen(self, matched):
        config, bundle, _, trips, _ = matched
        (site,) = bundle.sites
        through = trips_at_site(trips, site)
        ids = {t.trip_id for t in through}
        assert ids == {t.trip_id for t in trips if t.trip_id.startswith("T")}

    def test_planted_class_counts(self, matched):
        config, bundle, _, trips, _ = matched
        (site,) = bundle.sites
        through = trips_at_site(trips, site)
        n_mainline, n_a, n_b = planted_detour_counts(config)
        by_class = {TripClass.MAINLINE: 0, TripClass.DETOUR: 0}
        for trip in through:
            by_class[classify_trip(trip, site)] += 1
        assert by_class[TripClass.MAINLINE] == n_mainline
        assert by_class[TripClass.DETOUR] == n_a + n_b

    def test_route_table_has_exactly_two_routes(self, matched):
        config, bundle, graph, trips, _ = matched
        (site,) = bundle.sites
        through = trips_at_site(trips, site)
        table = detour_route_table(through, site, graph)
        n_mainline, n_a, n_b = planted_detour_counts(config)
        assert len(table) == 2
        assert (table[0].trip_count, table[1].trip_count) == (n_a, n_b)
        assert route_key_of(ROUTE_A_IDS) in table[0].route_key
        assert route_key_of(ROUTE_B_IDS) in table[1].route_key

    def test_no_mainline_trip_reported_as_detour(self, matched):
        config, bundle, _, trips, _ = matched
        (site,) = bundle.sites
        site_seg = config.site_segment_id
        for trip in trips_at_site(trips, site):
            if site_seg in trip.segment_sequence:
                assert classify_trip(trip, site) is TripClass.MAINLINE


class TestEnforcementEffect:
    def test_speed_dips_during_middle_period(self):
        config = small_config(
            n_trips=0, enforcement_speed_delta_mph=6.0, seed=990
        )
        bundle = generate_synthetic(config)
        aggs = aggregate_hourly(bundle.probe)
        before, during, _ = config.periods()
        sid = config.site_segment_id

        def mean_over(period):
            cells = [
                a for a in aggs if a.segment_id == sid and a.date in period
            ]
            assert cells
            return sum(a.mean_speed_mph for a in cells) / len(cells)

        dip = mean_over(before) - mean_over(during)
        assert dip > 3.0
