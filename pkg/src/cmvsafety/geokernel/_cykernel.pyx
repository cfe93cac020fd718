# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled geodesic kernels; the hot inner loop of segment matching.

Must stay arithmetic-identical to _pykernel so both backends agree.
"""

from libc.math cimport asin, atan2, cos, fmod, sin, sqrt

IMPLEMENTATION = "cython"

cdef double EARTH_RADIUS_M = 6_371_000.0
cdef double DEG2RAD = 0.017453292519943295
cdef double RAD2DEG = 57.29577951308232


cdef inline double _haversine(double lat1, double lon1, double lat2, double lon2) nogil:
    cdef double phi1 = lat1 * DEG2RAD
    cdef double phi2 = lat2 * DEG2RAD
    cdef double dphi = phi2 - phi1
    cdef double dlam = (lon2 - lon1) * DEG2RAD
    cdef double sp = sin(dphi * 0.5)
    cdef double sl = sin(dlam * 0.5)
    cdef double a = sp * sp + cos(phi1) * cos(phi2) * sl * sl
    if a > 1.0:
        a = 1.0
    elif a < 0.0:
        a = 0.0
    return 2.0 * EARTH_RADIUS_M * asin(sqrt(a))


cdef inline double _bearing(double lat1, double lon1, double lat2, double lon2) nogil:
    cdef double phi1 = lat1 * DEG2RAD
    cdef double phi2 = lat2 * DEG2RAD
    cdef double dlam = (lon2 - lon1) * DEG2RAD
    cdef double x = sin(dlam) * cos(phi2)
    cdef double y = cos(phi1) * sin(phi2) - sin(phi1) * cos(phi2) * cos(dlam)
    cdef double deg = atan2(x, y) * RAD2DEG
    deg = fmod(deg, 360.0)
    if deg < 0.0:
        deg += 360.0
    if deg == 360.0:
        deg = 0.0
    return deg


def haversine_m(double lat1, double lon1, double lat2, double lon2):
    """Great-circle distance between two points, in meters."""
    return _haversine(lat1, lon1, lat2, lon2)


def initial_bearing_deg(double lat1, double lon1, double lat2, double lon2):
    """Forward azimuth from point 1 to point 2, degrees in [0, 360)."""
    return _bearing(lat1, lon1, lat2, lon2)


def polyline_length_m(double[:] lats, double[:] lons):
    """Sum of chord great-circle lengths, in meters."""
    cdef Py_ssize_t n = lats.shape[0]
    cdef Py_ssize_t i
    cdef double total = 0.0
    for i in range(n - 1):
        total += _haversine(lats[i], lons[i], lats[i + 1], lons[i + 1])
    return total


def project_point_polyline(double lat, double lon, double[:] lats, double[:] lons):
    """Project a point onto a polyline; see _pykernel for the contract."""
    cdef Py_ssize_t n = lats.shape[0]
    if n == 0:
        raise ValueError("empty polyline")
    if n == 1:
        return _haversine(lat, lon, lats[0], lons[0]), 0.0, 0.0

    cdef double best_dist = 1e308
    cdef double best_offset = 0.0
    cdef double best_bearing = 0.0
    cdef double cum = 0.0
    cdef double alat, alon, blat, blon, coslat, bx, by, qx, qy, seg2, t
    cdef double plat, plon, dist, chord
    cdef Py_ssize_t i
    for i in range(n - 1):
        alat = lats[i]
        alon = lons[i]
        blat = lats[i + 1]
        blon = lons[i + 1]
        coslat = cos((alat + blat) * 0.5 * DEG2RAD)
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
        dist = _haversine(lat, lon, plat, plon)
        chord = _haversine(alat, alon, blat, blon)
        if dist < best_dist:
            best_dist = dist
            best_offset = cum + t * chord
            best_bearing = _bearing(alat, alon, blat, blon)
        cum += chord
    return best_dist, best_offset, best_bearing
