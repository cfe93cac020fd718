"""Geodesic kernel selection.

Uses the compiled Cython backend when the extension built, otherwise the
pure-Python twin. Set CMVSAFETY_PURE_PYTHON=1 to force the fallback (the
benchmark suite does this to compare the two).

Polyline arguments are float64 arrays (numpy, C-contiguous); the compiled
backend types them as memoryviews.
"""

from __future__ import annotations

import os

if os.environ.get("CMVSAFETY_PURE_PYTHON"):
    from . import _pykernel as _impl
else:
    try:
        from . import _cykernel as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernel as _impl

IMPLEMENTATION: str = _impl.IMPLEMENTATION
haversine_m = _impl.haversine_m
initial_bearing_deg = _impl.initial_bearing_deg
polyline_length_m = _impl.polyline_length_m
project_point_polyline = _impl.project_point_polyline

__all__ = [
    "IMPLEMENTATION",
    "haversine_m",
    "initial_bearing_deg",
    "polyline_length_m",
    "project_point_polyline",
]
