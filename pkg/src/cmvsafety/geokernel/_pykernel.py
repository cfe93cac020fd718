"""Pure-Python geodesic kernels.

Mirrors _cykernel operation for operation; keep the arithmetic in the two
implementations identical so either backend produces the same answers.
Distances are great-circle (haversine); chord projection uses a local
equirectangular frame, which is adequate at the sub-kilometer scales the
segment matcher works at.
"""

from __future__ import annotations

import math

IMPLEMENTATION = "python"

EARTH_RADIUS_M = 6_371_000.0


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance between two points, in meters."""
    phi1 = math.radians(lat1)
    phi2 = math.radians(lat2)
    dphi = phi2 - phi1
    dlam = math.radians(lon2 - lon1)
    a = (
        math.sin(dphi * 0.5) ** 2
        + math.cos(phi1) * math.cos(phi2) * math.sin(dlam * 0.5) ** 2
    )
    if a > 1.0:
        a = 1.0
    elif a < 0.0:
        a = 0.0
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(a))


def initial_bearing_deg(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Forward azimuth from point 1 to point 2, degrees in [0, 360)."""
    phi1 = math.radians(lat1)
    phi2 = math.radians(lat2)
    dlam = math.radians(lon2 - lon1)
    x = math.sin(dlam) * math.cos(phi2)
    y = math.cos(phi1) * math.sin(phi2) - math.sin(phi1) * math.cos(phi2) * math.cos(dlam)
    deg = math.degrees(math.atan2(x, y))
    deg = deg % 360.0
    if deg == 360.0:
        deg = 0.0
    return deg


def polyline_length_m(lats, lons) -> float:
    """Sum of chord great-circle lengths, in meters."""
    n = len(lats)
    total = 0.0
    for i in range(n - 1):
        total += haversine_m(lats[i], lons[i], lats[i + 1], lons[i + 1])
    return total


def project_point_polyline(lat: float, lon: float, lats, lons):
    """Project a point onto a polyline.

    Returns (distance_m, offset_m, bearing_deg): great-circle distance to
    the nearest point on any chord, the along-polyline offset of that
    nearest point from the polyline start, and the bearing of the chord it
    falls on. Ties between chords keep the earliest chord.
    """
    n = len(lats)
    if n == 0:
        raise ValueError("empty polyline")
    if n == 1:
        return haversine_m(lat, lon, lats[0], lons[0]), 0.0, 0.0

    best_dist = math.inf
    best_offset = 0.0
    best_bearing = 0.0
    cum = 0.0
    for i in range(n - 1):
        alat = lats[i]
        alon = lons[i]
        blat = lats[i + 1]
        blon = lons[i + 1]
        coslat = math.cos(math.radians((alat + blat) * 0.5))
        bx = (blon - alon) * coslat
        by = blat - alat
        qx = (lon - alon) * coslat
        qy = lat - alat
        seg2 = bx * bx + by * by
        if seg2 > 0.0:
            t = (qx * bx + qy * by) / seg2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
        else:
            t = 0.0
        plat = alat + t * (blat - alat)
        plon = alon + t * (blon - alon)
        dist = haversine_m(lat, lon, plat, plon)
        chord = haversine_m(alat, alon, blat, blon)
        if dist < best_dist:
            best_dist = dist
            best_offset = cum + t * chord
            best_bearing = initial_bearing_deg(alat, alon, blat, blon)
        cum += chord
    return best_dist, best_offset, best_bearing
