"""Exception hierarchy shared across the package.

Validation failures map to CLI exit code 1, I/O failures to exit code 2.
"""

from __future__ import annotations


class CmvSafetyError(Exception):
    """Base class for all package errors."""


class ValidationError(CmvSafetyError):
    """Input or configuration violates a documented contract."""


class DuplicateId(ValidationError):
    def __init__(self, entity_id: str, context: str = "") -> None:
        self.entity_id = entity_id
        suffix = f" in {context}" if context else ""
        super().__init__(f"duplicate id {entity_id!r}{suffix}")


class DanglingSuccessor(ValidationError):
    def __init__(self, segment_id: str, successor_id: str) -> None:
        self.segment_id = segment_id
        self.successor_id = successor_id
        super().__init__(
            f"segment {segment_id!r} lists unknown successor {successor_id!r}"
        )


class NoPath(CmvSafetyError):
    def __init__(self, from_id: str, to_id: str) -> None:
        self.from_id = from_id
        self.to_id = to_id
        super().__init__(f"no path from {from_id!r} to {to_id!r}")


class MalformedHeader(ValidationError):
    def __init__(self, expected: str, got: str) -> None:
        self.expected = expected
        self.got = got
        super().__init__(f"malformed header: expected {expected!r}, got {got!r}")


class RowError(ValidationError):
    """A CSV row violated an invariant. Carries the 1-based line number."""

    def __init__(self, line_no: int, code: str, message: str = "") -> None:
        self.line_no = line_no
        self.code = code
        self.message = message
        super().__init__(f"line {line_no}: {code}" + (f" ({message})" if message else ""))


class InvalidConfig(ValidationError):
    pass


class ZeroSpeed(ValidationError):
    pass


class NoWaypointMatched(CmvSafetyError):
    def __init__(self, trip_id: str) -> None:
        self.trip_id = trip_id
        super().__init__(f"no waypoint of trip {trip_id!r} matched the network")


class OverlappingPeriods(ValidationError):
    pass


class EmptyScope(ValidationError):
    pass


class GranularityError(ValidationError):
    """Requested a temporal resolution the data source cannot support."""
