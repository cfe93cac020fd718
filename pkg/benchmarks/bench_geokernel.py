"""Compare the compiled geodesic kernel against the pure-Python twin.

Times the map-matching hot path (point-to-polyline projection) plus the
supporting primitives on random corridor-shaped data, checks that both
backends agree, and prints throughput and speedup.

Usage: python3 benchmarks/bench_geokernel.py [--points N] [--vertices K] [--repeats R]
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from cmvsafety.geokernel import _pykernel

try:
    from cmvsafety.geokernel import _cykernel
except ImportError:
    _cykernel = None


def make_workload(n_points: int, n_vertices: int, seed: int = 20240603):
    rng = random.Random(seed)
    lat0, lon0 = 39.30, -77.72
    lats = np.cumsum([0.0] + [rng.uniform(0.001, 0.01) for _ in range(n_vertices - 1)]) + lat0
    lons = np.array([lon0 + rng.uniform(-0.002, 0.002) for _ in range(n_vertices)])
    points = [
        (rng.uniform(lats[0], lats[-1]), lon0 + rng.uniform(-0.05, 0.05))
        for _ in range(n_points)
    ]
    return lats.astype(np.float64), lons.astype(np.float64), points


def time_projection(impl, lats, lons, points, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        for lat, lon in points:
            impl.project_point_polyline(lat, lon, lats, lons)
        best = min(best, time.perf_counter() - started)
    return best


def time_lengths(impl, lats, lons, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        for _ in range(200):
            impl.polyline_length_m(lats, lons)
        best = min(best, time.perf_counter() - started)
    return best


def check_agreement(lats, lons, points) -> float:
    """Largest absolute difference between backends across the workload."""
    worst = 0.0
    for lat, lon in points[:200]:
        a = _cykernel.project_point_polyline(lat, lon, lats, lons)
        b = _pykernel.project_point_polyline(lat, lon, lats, lons)
        worst = max(worst, *(abs(x - y) for x, y in zip(a, b)))
    worst = max(
        worst,
        abs(_cykernel.polyline_length_m(lats, lons) - _pykernel.polyline_length_m(lats, lons)),
    )
    return worst


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=20000)
    parser.add_argument("--vertices", type=int, default=40)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    lats, lons, points = make_workload(args.points, args.vertices)
    print(f"workload: {args.points} projections onto a {args.vertices}-vertex polyline")

    if _cykernel is None:
        print("compiled backend not built; timing pure Python only")
        pure = time_projection(_pykernel, lats, lons, points, args.repeats)
        print(f"pure python   projection: {pure:.3f} s ({args.points / pure:,.0f} pts/s)")
        return 0

    worst = check_agreement(lats, lons, points)
    print(f"backend agreement: max abs diff {worst:.2e}")

    for label, fn in [
        ("projection", lambda impl: time_projection(impl, lats, lons, points, args.repeats)),
        ("polyline length", lambda impl: time_lengths(impl, lats, lons, args.repeats)),
    ]:
        compiled = fn(_cykernel)
        pure = fn(_pykernel)
        print(
            f"{label:>16}: compiled {compiled:.3f} s | pure {pure:.3f} s"
            f" | speedup {pure / compiled:.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
