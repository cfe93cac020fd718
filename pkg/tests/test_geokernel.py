"""Geodesic kernel tests: known values, invariants, backend parity."""

import importlib
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmvsafety.geokernel import _pykernel

try:
    from cmvsafety.geokernel import _cykernel
except ImportError:
    _cykernel = None

BACKENDS = [_pykernel] + ([_cykernel] if _cykernel is not None else [])
BACKEND_IDS = [b.IMPLEMENTATION for b in BACKENDS]


def arr(values):
    return np.ascontiguousarray(values, dtype=np.float64)


@pytest.fixture(params=BACKENDS, ids=BACKEND_IDS)
def kernel(request):
    return request.param


class TestHaversine:
    def test_zero_distance(self, kernel):
        assert kernel.haversine_m(39.5, -77.7, 39.5, -77.7) == 0.0

    def test_one_degree_latitude(self, kernel):
        # 1 deg of latitude on a 6371 km sphere: R * pi/180
        expected = 6_371_000.0 * math.pi / 180.0
        got = kernel.haversine_m(39.0, -77.0, 40.0, -77.0)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_antipodal(self, kernel):
        expected = 6_371_000.0 * math.pi
        got = kernel.haversine_m(0.0, 0.0, 0.0, 180.0)
        assert got == pytest.approx(expected, rel=1e-9)

    def test_symmetry(self, kernel):
        a = kernel.haversine_m(39.1, -77.2, 39.7, -76.4)
        b = kernel.haversine_m(39.7, -76.4, 39.1, -77.2)
        assert a == b


class TestBearing:
    def test_due_north(self, kernel):
        assert kernel.initial_bearing_deg(39.0, -77.0, 40.0, -77.0) == 0.0

    def test_due_south(self, kernel):
        assert kernel.initial_bearing_deg(40.0, -77.0, 39.0, -77.0) == pytest.approx(180.0)

    def test_due_east_on_equator(self, kernel):
        assert kernel.initial_bearing_deg(0.0, 0.0, 0.0, 1.0) == pytest.approx(90.0)

    def test_due_west_on_equator(self, kernel):
        assert kernel.initial_bearing_deg(0.0, 1.0, 0.0, 0.0) == pytest.approx(270.0)

    def test_range(self, kernel):
        for dlat, dlon in [(0.3, 0.7), (-0.2, 0.5), (-0.6, -0.1), (0.4, -0.9)]:
            b = kernel.initial_bearing_deg(39.0, -77.0, 39.0 + dlat, -77.0 + dlon)
            assert 0.0 <= b < 360.0


class TestPolylineLength:
    def test_two_points(self, kernel):
        lats, lons = arr([39.0, 40.0]), arr([-77.0, -77.0])
        assert kernel.polyline_length_m(lats, lons) == pytest.approx(
            kernel.haversine_m(39.0, -77.0, 40.0, -77.0)
        )

    def test_additive(self, kernel):
        lats, lons = arr([39.0, 39.5, 40.0]), arr([-77.0, -77.2, -77.0])
        total = kernel.polyline_length_m(lats, lons)
        parts = kernel.haversine_m(39.0, -77.0, 39.5, -77.2) + kernel.haversine_m(
            39.5, -77.2, 40.0, -77.0
        )
        assert total == pytest.approx(parts, rel=1e-12)

    def test_single_point_is_zero(self, kernel):
        assert kernel.polyline_length_m(arr([39.0]), arr([-77.0])) == 0.0


class TestProjection:
    def test_point_on_line_midpoint(self, kernel):
        lats, lons = arr([39.0, 39.01]), arr([-77.0, -77.0])
        dist, offset, bearing = kernel.project_point_polyline(39.005, -77.0, lats, lons)
        assert dist == pytest.approx(0.0, abs=1e-6)
        half = kernel.haversine_m(39.0, -77.0, 39.01, -77.0) / 2.0
        assert offset == pytest.approx(half, rel=1e-6)
        assert bearing == pytest.approx(0.0)

    def test_perpendicular_offset(self, kernel):
        lats, lons = arr([39.0, 39.01]), arr([-77.0, -77.0])
        dist, offset, bearing = kernel.project_point_polyline(39.005, -77.001, lats, lons)
        expected = kernel.haversine_m(39.005, -77.0, 39.005, -77.001)
        assert dist == pytest.approx(expected, rel=1e-3)
        assert bearing == pytest.approx(0.0)

    def test_before_start_clamps(self, kernel):
        lats, lons = arr([39.0, 39.01]), arr([-77.0, -77.0])
        dist, offset, _ = kernel.project_point_polyline(38.99, -77.0, lats, lons)
        assert offset == 0.0
        assert dist == pytest.approx(kernel.haversine_m(38.99, -77.0, 39.0, -77.0))

    def test_after_end_clamps(self, kernel):
        lats, lons = arr([39.0, 39.01]), arr([-77.0, -77.0])
        dist, offset, _ = kernel.project_point_polyline(39.02, -77.0, lats, lons)
        assert offset == pytest.approx(kernel.polyline_length_m(lats, lons))
        assert dist == pytest.approx(kernel.haversine_m(39.02, -77.0, 39.01, -77.0))

    def test_tie_keeps_earliest_chord(self, kernel):
        # Right-angle polyline; the corner point is equidistant from both
        # chords, so the offset must come from the first.
        lats = arr([39.0, 39.01, 39.01])
        lons = arr([-77.0, -77.0, -76.99])
        corner_dist = kernel.haversine_m(39.005, -76.995, 39.01, -77.0)
        dist, offset, bearing = kernel.project_point_polyline(
            39.005, -76.995, lats, lons
        )
        assert dist <= corner_dist + 1e-9
        first_chord = kernel.haversine_m(39.0, -77.0, 39.01, -77.0)
        if dist == pytest.approx(corner_dist):
            assert offset == pytest.approx(first_chord, rel=1e-9)
            assert bearing == pytest.approx(0.0)

    def test_single_vertex(self, kernel):
        dist, offset, bearing = kernel.project_point_polyline(
            39.001, -77.0, arr([39.0]), arr([-77.0])
        )
        assert dist == pytest.approx(kernel.haversine_m(39.001, -77.0, 39.0, -77.0))
        assert offset == 0.0
        assert bearing == 0.0

    def test_empty_polyline_raises(self, kernel):
        with pytest.raises(ValueError):
            kernel.project_point_polyline(39.0, -77.0, arr([]), arr([]))


coord_lat = st.floats(min_value=37.9, max_value=39.8, allow_nan=False)
coord_lon = st.floats(min_value=-79.6, max_value=-75.0, allow_nan=False)


@pytest.mark.skipif(_cykernel is None, reason="compiled kernel not built")
class TestBackendParity:
    """Compiled and pure implementations must agree to 1e-9 relative."""

    @given(lat1=coord_lat, lon1=coord_lon, lat2=coord_lat, lon2=coord_lon)
    @settings(max_examples=300, deadline=None)
    def test_haversine(self, lat1, lon1, lat2, lon2):
        a = _pykernel.haversine_m(lat1, lon1, lat2, lon2)
        b = _cykernel.haversine_m(lat1, lon1, lat2, lon2)
        assert b == pytest.approx(a, rel=1e-9, abs=1e-9)

    @given(lat1=coord_lat, lon1=coord_lon, lat2=coord_lat, lon2=coord_lon)
    @settings(max_examples=300, deadline=None)
    def test_bearing(self, lat1, lon1, lat2, lon2):
        a = _pykernel.initial_bearing_deg(lat1, lon1, lat2, lon2)
        b = _cykernel.initial_bearing_deg(lat1, lon1, lat2, lon2)
        assert b == pytest.approx(a, rel=1e-9, abs=1e-9)

    @given(
        pts=st.lists(st.tuples(coord_lat, coord_lon), min_size=2, max_size=8),
        qlat=coord_lat,
        qlon=coord_lon,
    )
    @settings(max_examples=300, deadline=None)
    def test_projection(self, pts, qlat, qlon):
        lats = arr([p[0] for p in pts])
        lons = arr([p[1] for p in pts])
        da, oa, ba = _pykernel.project_point_polyline(qlat, qlon, lats, lons)
        db, ob, bb = _cykernel.project_point_polyline(qlat, qlon, lats, lons)
        assert db == pytest.approx(da, rel=1e-9, abs=1e-9)
        assert ob == pytest.approx(oa, rel=1e-9, abs=1e-9)
        assert bb == pytest.approx(ba, rel=1e-9, abs=1e-9)

    @given(pts=st.lists(st.tuples(coord_lat, coord_lon), min_size=1, max_size=8))
    @settings(max_examples=300, deadline=None)
    def test_length(self, pts):
        lats = arr([p[0] for p in pts])
        lons = arr([p[1] for p in pts])
        a = _pykernel.polyline_length_m(lats, lons)
        b = _cykernel.polyline_length_m(lats, lons)
        assert b == pytest.approx(a, rel=1e-9, abs=1e-9)


def test_selector_env_var(monkeypatch):
    import cmvsafety.geokernel as gk

    monkeypatch.setenv("CMVSAFETY_PURE_PYTHON", "1")
    reloaded = importlib.reload(gk)
    assert reloaded.IMPLEMENTATION == "python"
    monkeypatch.delenv("CMVSAFETY_PURE_PYTHON")
    importlib.reload(gk)
