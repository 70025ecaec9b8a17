#!/usr/bin/env python3
"""Resolve timestamps against a school timetable with overrides.

Demonstrates half-open window boundaries, a cancelled break, a replaced
day, and the four-label obfuscated location that is all the platform ever
reveals about where a child is.
"""

import json
from datetime import date, datetime
from zoneinfo import ZoneInfo

from senseme.schedule import (
    obfuscate_location,
    parse_overrides,
    parse_timetable,
    resolve_window,
    windows_for_day,
)

TIMETABLE = {
    "timezone": "Europe/Lisbon",
    "days": {
        "mon": [
            {"window_id": "c1", "kind": "class", "class_id": "math",
             "start": "09:00", "end": "10:00"},
            {"window_id": "b1", "kind": "break", "start": "10:00", "end": "10:30"},
            {"window_id": "c2", "kind": "class", "class_id": "reading",
             "start": "10:30", "end": "11:30"},
        ],
    },
}

OVERRIDES = [
    {"date": "2026-01-12", "cancel": ["b1"]},
    {"date": "2026-01-19", "replace": [
        {"window_id": "trip", "kind": "break", "start": "09:00", "end": "12:00"},
    ]},
]


def at(day: date, hhmm: str) -> int:
    hh, mm = hhmm.split(":")
    return int(datetime(day.year, day.month, day.day, int(hh), int(mm),
                        tzinfo=ZoneInfo("Europe/Lisbon")).timestamp())


def main() -> None:
    tt = parse_timetable(json.dumps(TIMETABLE))
    overrides = parse_overrides(json.dumps(OVERRIDES))
    monday = date(2026, 1, 5)

    print("== plain Monday ==")
    for hhmm in ("08:59", "09:00", "10:00", "10:29", "11:30"):
        window = resolve_window(tt, overrides, at(monday, hhmm))
        name = f"{window.window_id} ({window.kind})" if window else "no window"
        print(f"  {hhmm} -> {name}")
    print("  10:00 lands in the break, not the class: intervals are [start, end)")

    print("\n== override: break cancelled on 2026-01-12 ==")
    cancelled_day = date(2026, 1, 12)
    for w in windows_for_day(tt, overrides, cancelled_day):
        print(f"  {w.window_id} {w.kind}")
    print("\n== override: whole day replaced by a field trip on 2026-01-19 ==")
    for w in windows_for_day(tt, overrides, date(2026, 1, 19)):
        print(f"  {w.window_id} {w.kind}")

    print("\n== obfuscated location ==")
    t = at(monday, "09:30")
    for label, last_seen in [
        ("data 5 s old, in class", t - 5),
        ("data 20 min old", t - 1200),
        ("never reported", None),
    ]:
        print(f"  {label:26s} -> {obfuscate_location(tt, overrides, last_seen, t)!r}")
    gap = at(cancelled_day, "10:10")  # cancelled break leaves a gap in the day
    print(f"  fresh data, schedule gap    -> "
          f"{obfuscate_location(tt, overrides, gap - 5, gap)!r}")


if __name__ == "__main__":
    main()
