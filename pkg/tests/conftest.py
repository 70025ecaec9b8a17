"""Shared fixtures: a small weekday school, roster, and service factory."""

from __future__ import annotations

import json
import socket
import threading
import time
from contextlib import contextmanager
from datetime import date, datetime
from zoneinfo import ZoneInfo

import pytest
import uvicorn

from senseme.service import AwarenessService

SCHOOL_TZ = "Europe/Lisbon"

# Mon-Fri: two classes and two breaks, 50 minutes total.
WEEKDAY_WINDOWS = [
    {"window_id": "c1", "kind": "class", "class_id": "math",
     "start": "09:00", "end": "09:15"},
    {"window_id": "b1", "kind": "break", "start": "09:15", "end": "09:25"},
    {"window_id": "c2", "kind": "class", "class_id": "reading",
     "start": "09:25", "end": "09:40"},
    {"window_id": "b2", "kind": "break", "start": "09:40", "end": "09:50"},
]

TIMETABLE_DOC = {
    "timezone": SCHOOL_TZ,
    "days": {day: WEEKDAY_WINDOWS for day in ("mon", "tue", "wed", "thu", "fri")},
}

MONDAY = date(2026, 1, 5)   # a Monday
TUESDAY = date(2026, 1, 6)
SATURDAY = date(2026, 1, 10)


def ts(day: date, hhmm: str) -> int:
    """Unix timestamp of a local time-of-day on the school's clock."""
    hh, mm = hhmm.split(":")
    local = datetime(day.year, day.month, day.day, int(hh), int(mm),
                     tzinfo=ZoneInfo(SCHOOL_TZ))
    return int(local.timestamp())


def roster_doc(n_children: int = 3) -> dict:
    return {
        "school_name": "Hillside Primary",
        "children": [
            {"child_id": f"c{i:02d}", "device_id": f"d-c{i:02d}",
             "classes": ["math", "reading"]}
            for i in range(1, n_children + 1)
        ],
    }


@pytest.fixture
def timetable_text() -> str:
    return json.dumps(TIMETABLE_DOC)


@pytest.fixture
def roster_text() -> str:
    return json.dumps(roster_doc())


@pytest.fixture
def make_service(tmp_path, timetable_text, roster_text):
    """Factory for services over a fresh (or an existing) log file."""
    created = []

    def factory(log_name: str = "events.log", overrides: str | None = None,
                clock_start: int = ts(MONDAY, "08:00")):
        clock = {"now": clock_start}

        def tick() -> int:
            clock["now"] += 1
            return clock["now"]

        service = AwarenessService(
            log_path=tmp_path / log_name,
            timetable=timetable_text,
            overrides=overrides,
            roster=roster_text,
            clock=tick,
            fsync=False,
        )
        created.append(service)
        return service

    yield factory
    for service in created:
        service.close()


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@contextmanager
def live_server(app):
    """Serve an ASGI app on an ephemeral local port for the duration."""
    port = free_port()
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("test server did not start")
        time.sleep(0.01)
    try:
        yield f"http://127.0.0.1:{port}"
    finally:
        server.should_exit = True
        thread.join(timeout=10)
