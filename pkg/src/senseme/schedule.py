"""School timetable: window resolution, per-date overrides, location labels.

All timestamps in the platform are UTC Unix seconds; the timetable carries
a single IANA timezone (one school per deployment) used to map timestamps
to local dates and minutes-of-day. Window intervals are half-open
[start, end), so a second on the boundary between two adjacent windows
belongs to the later one.

Location is never precise. The only labels that exist are the closed set
"in class", "on break", "at school", "away", derived from the schedule
plus data freshness.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from typing import Iterable, Mapping
from zoneinfo import ZoneInfo, ZoneInfoNotFoundError

from .errors import InvertedWindow, OverlapError, SchemaError, UnknownZone

KIND_CLASS = "class"
KIND_BREAK = "break"

DAY_KEYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")  # index == date.weekday()

LABEL_IN_CLASS = "in class"
LABEL_ON_BREAK = "on break"
LABEL_AT_SCHOOL = "at school"
LABEL_AWAY = "away"
LOCATION_LABELS = (LABEL_IN_CLASS, LABEL_ON_BREAK, LABEL_AT_SCHOOL, LABEL_AWAY)

# A child with no data for longer than this is reported "away".
STALE_AFTER_SECONDS = 900


@dataclass(frozen=True)
class ScheduleWindow:
    """One recurring window on a weekday, in minutes since local midnight."""

    window_id: str
    kind: str
    start: int
    end: int
    class_id: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in (KIND_CLASS, KIND_BREAK):
            raise SchemaError(f"window kind must be 'class' or 'break', got {self.kind!r}")
        if self.kind == KIND_CLASS and not self.class_id:
            raise SchemaError(f"class window {self.window_id!r} needs a class_id")
        if not (0 <= self.start < 24 * 60) or not (0 < self.end <= 24 * 60):
            raise SchemaError(f"window {self.window_id!r} times must lie within one day")
        if self.end <= self.start:
            raise InvertedWindow(f"window {self.window_id!r} ends at or before it starts")


@dataclass(frozen=True)
class Timetable:
    timezone: str
    days: tuple[tuple[ScheduleWindow, ...], ...]  # indexed by date.weekday()

    @property
    def zone(self) -> ZoneInfo:
        return ZoneInfo(self.timezone)


@dataclass(frozen=True)
class ScheduleOverride:
    """Per-date change: cancel named windows, or replace the whole day."""

    date: date
    cancelled: frozenset[str] = frozenset()
    replacements: tuple[ScheduleWindow, ...] | None = None


@dataclass(frozen=True)
class WindowInstance:
    """A window materialized on a calendar date, with absolute bounds."""

    date: date
    window_id: str
    kind: str
    start: int  # Unix seconds, inclusive
    end: int    # Unix seconds, exclusive
    class_id: str | None = None

    def contains(self, t: int) -> bool:
        return self.start <= t < self.end


def _check_disjoint(windows: Iterable[ScheduleWindow], context: str) -> None:
    ordered = sorted(windows, key=lambda w: w.start)
    for a, b in zip(ordered, ordered[1:]):
        if b.start < a.end:
            raise OverlapError(
                f"{context}: windows {a.window_id!r} and {b.window_id!r} overlap"
            )


def _parse_minutes(text: str) -> int:
    try:
        hh, mm = text.split(":")
        minutes = int(hh) * 60 + int(mm)
    except (ValueError, AttributeError):
        raise SchemaError(f"bad time-of-day {text!r}, expected HH:MM") from None
    return minutes


def _parse_window(obj: Mapping) -> ScheduleWindow:
    if not isinstance(obj, Mapping):
        raise SchemaError("window entry must be an object")
    try:
        window_id = obj["window_id"]
        kind = obj["kind"]
        start = obj["start"]
        end = obj["end"]
    except KeyError as missing:
        raise SchemaError(f"window entry missing field {missing}") from None
    return ScheduleWindow(
        window_id=str(window_id),
        kind=str(kind),
        start=_parse_minutes(start),
        end=_parse_minutes(end),
        class_id=obj.get("class_id"),
    )


def parse_timetable(document: str | Mapping) -> Timetable:
    """Parse and validate a timetable document.

    Accepts the JSON text or an already-decoded mapping of the shape
    ``{"timezone": "<IANA>", "days": {"mon": [window, ...], ...}}``.

    Raises:
        UnknownZone: timezone not in the zone database.
        InvertedWindow: a window with end <= start.
        OverlapError: two windows of the same day overlap.
        SchemaError: any other shape problem.
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"timetable is not valid JSON: {exc}") from None
    if not isinstance(document, Mapping):
        raise SchemaError("timetable document must be a JSON object")

    timezone = document.get("timezone")
    if not isinstance(timezone, str):
        raise SchemaError("timetable needs a 'timezone' string")
    try:
        ZoneInfo(timezone)
    except (ZoneInfoNotFoundError, ValueError):
        raise UnknownZone(f"unknown timezone {timezone!r}") from None

    days_doc = document.get("days", {})
    if not isinstance(days_doc, Mapping):
        raise SchemaError("'days' must be an object keyed by weekday")
    for key in days_doc:
        if key not in DAY_KEYS:
            raise SchemaError(f"unknown day key {key!r}, expected one of {DAY_KEYS}")

    days: list[tuple[ScheduleWindow, ...]] = []
    for key in DAY_KEYS:
        windows = tuple(_parse_window(w) for w in days_doc.get(key, []))
        seen_ids = [w.window_id for w in windows]
        if len(seen_ids) != len(set(seen_ids)):
            raise SchemaError(f"duplicate window_id on {key}")
        _check_disjoint(windows, key)
        days.append(tuple(sorted(windows, key=lambda w: w.start)))
    return Timetable(timezone=timezone, days=tuple(days))


def parse_overrides(document: str | list) -> dict[date, ScheduleOverride]:
    """Parse the overrides file: a JSON array of cancel or replace entries."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"overrides file is not valid JSON: {exc}") from None
    if not isinstance(document, list):
        raise SchemaError("overrides document must be a JSON array")

    overrides: dict[date, ScheduleOverride] = {}
    for entry in document:
        if not isinstance(entry, Mapping) or "date" not in entry:
            raise SchemaError("override entry must be an object with a 'date'")
        try:
            day = date.fromisoformat(entry["date"])
        except (TypeError, ValueError):
            raise SchemaError(f"bad override date {entry.get('date')!r}") from None
        if day in overrides:
            raise SchemaError(f"duplicate override for {day.isoformat()}")
        if "replace" in entry:
            replacements = tuple(_parse_window(w) for w in entry["replace"])
            _check_disjoint(replacements, f"override {day.isoformat()}")
            overrides[day] = ScheduleOverride(date=day, replacements=replacements)
        elif "cancel" in entry:
            cancelled = frozenset(str(wid) for wid in entry["cancel"])
            overrides[day] = ScheduleOverride(date=day, cancelled=cancelled)
        else:
            raise SchemaError("override entry needs 'cancel' or 'replace'")
    return overrides


def _instantiate(window: ScheduleWindow, day: date, zone: ZoneInfo) -> WindowInstance:
    midnight = datetime(day.year, day.month, day.day, tzinfo=zone)
    start = midnight + timedelta(minutes=window.start)
    end = midnight + timedelta(minutes=window.end)
    return WindowInstance(
        date=day,
        window_id=window.window_id,
        kind=window.kind,
        start=int(start.timestamp()),
        end=int(end.timestamp()),
        class_id=window.class_id,
    )


def windows_for_day(
    tt: Timetable,
    overrides: Mapping[date, ScheduleOverride],
    day: date,
) -> list[WindowInstance]:
    """Effective window instances for a date, sorted by start.

    A replacement override substitutes the whole day; cancellations drop
    the named windows from the configured list.
    """
    override = overrides.get(day)
    if override is not None and override.replacements is not None:
        configured: Iterable[ScheduleWindow] = override.replacements
    else:
        configured = tt.days[day.weekday()]
        if override is not None:
            configured = [w for w in configured if w.window_id not in override.cancelled]
    zone = tt.zone
    instances = [_instantiate(w, day, zone) for w in configured]
    instances.sort(key=lambda inst: inst.start)
    return instances


def local_date_of(tt: Timetable, t: int) -> date:
    return datetime.fromtimestamp(t, tt.zone).date()


def day_bounds(tt: Timetable, day: date) -> tuple[int, int]:
    """Absolute [start, end) of a local calendar date."""
    zone = tt.zone
    start = datetime(day.year, day.month, day.day, tzinfo=zone)
    end = datetime.combine(day + timedelta(days=1), datetime.min.time(), tzinfo=zone)
    return int(start.timestamp()), int(end.timestamp())


def resolve_window(
    tt: Timetable,
    overrides: Mapping[date, ScheduleOverride],
    t: int,
) -> WindowInstance | None:
    """The unique effective window whose [start, end) contains t, if any."""
    day = local_date_of(tt, t)
    for instance in windows_for_day(tt, overrides, day):
        if instance.contains(t):
            return instance
    return None


def obfuscate_location(
    tt: Timetable,
    overrides: Mapping[date, ScheduleOverride],
    last_seen: int | None,
    at: int,
    stale_after: int = STALE_AFTER_SECONDS,
) -> str:
    """Abstract location label for a child at time ``at``.

    Returns "away" when the device has been silent for longer than
    ``stale_after`` (or was never heard from); otherwise the label follows
    the schedule: the containing window's kind, or "at school" for a gap
    inside the school day's overall span.
    """
    if last_seen is None or at - last_seen > stale_after:
        return LABEL_AWAY
    window = resolve_window(tt, overrides, at)
    if window is not None:
        return LABEL_IN_CLASS if window.kind == KIND_CLASS else LABEL_ON_BREAK
    day_windows = windows_for_day(tt, overrides, local_date_of(tt, at))
    if day_windows and day_windows[0].start <= at <= day_windows[-1].end:
        return LABEL_AT_SCHOOL
    return LABEL_AWAY
