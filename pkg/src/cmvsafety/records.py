"""Domain record types and shared enums for the ingested datasets."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Mapping


class Direction(str, enum.Enum):
    N = "N"
    S = "S"
    E = "E"
    W = "W"


class RoadClass(str, enum.Enum):
    INTERSTATE = "Interstate"
    US_ROUTE = "USRoute"
    STATE_ROUTE = "StateRoute"
    LOCAL = "Local"


class VehicleClass(str, enum.Enum):
    ALL = "All"
    CMV = "CMV"


class Severity(str, enum.Enum):
    FATAL = "Fatal"
    INJURY = "Injury"
    PROPERTY_DAMAGE = "PropertyDamage"


class VwsViolationCategory(str, enum.Enum):
    SPEEDING = "Speeding"
    OVERWEIGHT = "Overweight"
    DIMENSION = "Dimension"
    OTHER = "Other"


class FmcsaCategory(str, enum.Enum):
    VEHICLE_MAINTENANCE = "VehicleMaintenance"
    UNSAFE_DRIVING = "UnsafeDriving"
    HOURS_OF_SERVICE = "HoursOfService"
    DRIVER_FITNESS = "DriverFitness"
    HAZMAT_COMPLIANCE = "HazmatCompliance"
    CONTROLLED_SUBSTANCES = "ControlledSubstances"


class PeriodLabel(str, enum.Enum):
    BEFORE = "Before"
    ENFORCEMENT = "Enforcement"
    AFTER = "After"


class SiteKind(str, enum.Enum):
    TWIS = "TWIS"
    VWS = "VWS"


@dataclass(frozen=True)
class ProbeSpeedRecord:
    """One 5-minute probe speed observation for a segment."""

    segment_id: str
    epoch_start: datetime  # UTC, aligned to a 5-minute boundary
    vehicle_class: VehicleClass
    speed_mph: float


@dataclass(frozen=True)
class CrashRecord:
    report_number: str
    timestamp: datetime
    lat: float
    lon: float
    severity: Severity
    cmv_involved: bool
    direction_hint: Direction | None = None


@dataclass(frozen=True)
class Waypoint:
    timestamp: datetime
    lat: float
    lon: float
    heading_deg: float | None = None


@dataclass(frozen=True)
class Trajectory:
    """An anonymized trip: >= 2 waypoints with strictly increasing timestamps."""

    trip_id: str
    waypoints: tuple[Waypoint, ...]


@dataclass(frozen=True)
class VwsRecord:
    """One automated weigh-station pass. Empty violations means a clean pass."""

    station_id: str
    timestamp: datetime
    fhwa_class: int
    gross_weight_lb: float
    speed_mph: float
    length_ft: float
    violations: frozenset[VwsViolationCategory] = field(default_factory=frozenset)


@dataclass(frozen=True)
class FmcsaDailyRecord:
    """State-level daily inspection and violation counts (no time of day)."""

    date: date
    inspections: int
    violations_by_category: Mapping[FmcsaCategory, int]
    oos_count: int


@dataclass(frozen=True)
class SiteInitiativeRecord:
    """Site-tracked inspection/citation totals for one assessment period."""

    site_tag: str
    period_label: PeriodLabel
    inspections: int
    citations: int


@dataclass(frozen=True)
class EnforcementSite:
    """A fixed or temporary enforcement location on the network.

    bbox is (min_lat, min_lon, max_lat, max_lon); mainline_segment_ids
    carries one segment per monitored direction.
    """

    site_id: str
    kind: SiteKind
    lat: float
    lon: float
    mainline_segment_ids: tuple[str, ...]
    bbox: tuple[float, float, float, float]

    def contains(self, lat: float, lon: float) -> bool:
        min_lat, min_lon, max_lat, max_lon = self.bbox
        return min_lat <= lat <= max_lat and min_lon <= lon <= max_lon
