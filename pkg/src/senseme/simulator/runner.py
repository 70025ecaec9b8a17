"""Posting loop: generate day batches and drive the ingestion API.

Batches go out in timestamp order. With a server URL the runner posts
each batch and treats any non-2xx as a reject; with a dry-run directory
it writes the identical batch documents to one newline-delimited JSON
file per day, which is what the determinism checks hash.
"""

from __future__ import annotations

import json
import sys
import time
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import httpx

from ..schedule import parse_overrides, parse_timetable, windows_for_day
from .profiles import SimConfig, check_anomalies
from .synth import generate_day

# Give up hunting for school days after this many empty calendar days.
_MAX_CALENDAR_SPAN = 1000


@dataclass(frozen=True)
class SimReport:
    school_days: int
    batches_posted: int
    events_posted: int
    rejects: int
    exit_code: int


def school_days(config: SimConfig, tt, overrides) -> list[date]:
    """The first ``config.days`` dates with at least one effective window."""
    days: list[date] = []
    day = config.start_date
    scanned = 0
    while len(days) < config.days and scanned < _MAX_CALENDAR_SPAN:
        if windows_for_day(tt, overrides, day):
            days.append(day)
        day += timedelta(days=1)
        scanned += 1
    return days


def run(config: SimConfig, transport: httpx.BaseTransport | None = None,
        out=sys.stdout) -> SimReport:
    """Generate and deliver the whole simulation; returns a summary report.

    Exit code 0 only when every batch was accepted. Connection failures
    abort immediately; HTTP rejects are counted and reported.
    """
    tt = parse_timetable(config.timetable_text)
    overrides = parse_overrides(config.overrides_text) if config.overrides_text else {}
    check_anomalies(config.anomalies, config.profiles)

    days = school_days(config, tt, overrides)
    posted = rejects = events = 0
    client: httpx.Client | None = None
    dry_dir: Path | None = None

    if config.dry_run_dir is not None:
        dry_dir = Path(config.dry_run_dir)
        dry_dir.mkdir(parents=True, exist_ok=True)
    elif config.server_url is not None:
        headers = {}
        if config.token:
            headers["Authorization"] = f"Bearer {config.token}"
        client = httpx.Client(base_url=config.server_url, headers=headers,
                              transport=transport, timeout=30.0)
    else:
        print("simulator: need --server or --dry-run", file=out)
        return SimReport(0, 0, 0, 0, 2)

    try:
        for day in days:
            batches = generate_day(config, tt, overrides, day)
            if dry_dir is not None:
                path = dry_dir / f"batches-{day.isoformat()}.ndjson"
                with open(path, "w", encoding="utf-8") as fh:
                    for batch in batches:
                        doc = {"endpoint": batch["endpoint"], "body": batch["body"]}
                        fh.write(json.dumps(doc, sort_keys=True,
                                            separators=(",", ":")) + "\n")
                posted += len(batches)
                events += sum(_batch_size(b) for b in batches)
                continue

            previous_t0 = None
            for batch in batches:
                if config.compress > 0 and previous_t0 is not None:
                    gap = (batch["t0"] - previous_t0) / config.compress
                    if gap > 0:
                        time.sleep(gap)
                previous_t0 = batch["t0"]
                try:
                    response = client.post(batch["endpoint"], json=batch["body"])
                except httpx.HTTPError as exc:
                    print(f"simulator: connection failure posting "
                          f"{batch['endpoint']}: {exc}", file=out)
                    return SimReport(len(days), posted, events, rejects + 1, 1)
                if 200 <= response.status_code < 300:
                    posted += 1
                    events += _batch_size(batch)
                else:
                    rejects += 1
                    print(f"simulator: reject {response.status_code} on "
                          f"{batch['endpoint']}: {response.text[:200]}", file=out)
    finally:
        if client is not None:
            client.close()

    exit_code = 0 if rejects == 0 else 1
    print(f"simulator: {len(days)} school days, {posted} batches, "
          f"{events} events posted, {rejects} rejects", file=out)
    return SimReport(len(days), posted, events, rejects, exit_code)


def _batch_size(batch: dict) -> int:
    body = batch["body"]
    if "features" in body:
        return len(body["features"])
    if "sightings" in body:
        return len(body["sightings"])
    return 1
