"""Exception hierarchy shared across the platform.

Every error that crosses a module boundary is a named subclass of
:class:`SensemeError` so callers (and the HTTP layer) can map failures to
stable identifiers without string matching.
"""

from __future__ import annotations


class SensemeError(Exception):
    """Base class for all domain errors."""


# -- device-side feature extraction ------------------------------------

class InvalidSample(SensemeError):
    """Accelerometer sample violates its invariants (non-finite or out of range)."""


class InvalidFrame(SensemeError):
    """Audio frame is empty or carries out-of-range amplitudes."""


# -- schedule -----------------------------------------------------------

class InvertedWindow(SensemeError):
    """A schedule window ends at or before it starts."""


class OverlapError(SensemeError):
    """Two windows on the same day overlap."""


class UnknownZone(SensemeError):
    """Timetable names a timezone the zone database does not know."""


# -- aggregation --------------------------------------------------------

class KindMismatch(SensemeError):
    """Index kind does not match the window kind (physical=break, verbal=class)."""


# -- service ------------------------------------------------------------

class SchemaError(SensemeError):
    """Payload does not match the documented wire shape."""


class PrivacyViolation(SensemeError):
    """Payload contains a forbidden key (raw audio / precise location)."""


class SelfSighting(SensemeError):
    """A proximity sighting reports a device seeing itself."""


class UnknownDevice(SensemeError):
    """Device id is not in the roster."""


class UnknownChild(SensemeError):
    """Child id is not in the roster."""


class UnknownEmotion(SensemeError):
    """Self-report emotion id is not in the catalog."""


class CueNotFound(SensemeError):
    """Cue key does not resolve to an effective window on that date."""


class EmptyText(SensemeError):
    """Annotation or message text is empty (or exceeds the length cap)."""


class BadRole(SensemeError):
    """Message sender role is not 'teacher' or 'parent'."""


class BadDate(SensemeError):
    """Date or timestamp query parameter cannot be parsed."""


# -- event log ----------------------------------------------------------

class DecodeError(SensemeError):
    """A log line cannot be decoded into a valid event record."""


class CorruptLog(SensemeError):
    """Log file failed stream validation.

    Carries the 1-based number of the first bad line.
    """

    def __init__(self, line_number: int, reason: str = ""):
        self.line_number = line_number
        self.reason = reason
        detail = f"corrupt log at line {line_number}"
        if reason:
            detail = f"{detail}: {reason}"
        super().__init__(detail)
