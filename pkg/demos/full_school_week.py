#!/usr/bin/env python3
"""End to end without HTTP: simulate a school week straight into the service.

Builds a four-child school, generates seven school days of raw signals
(one quiet day injected for one child), feeds every batch through the
service's ingestion path, and prints the awareness cues a teacher would
review, baselines and deviation levels included.
"""

import json
import tempfile
from datetime import date, timedelta
from pathlib import Path

from senseme.schedule import parse_timetable
from senseme.service import AwarenessService
from senseme.simulator import ChildProfile, SimConfig, generate_day, parse_anomaly_spec

TIMETABLE = {
    "timezone": "Europe/Lisbon",
    "days": {day: [
        {"window_id": "c1", "kind": "class", "class_id": "math",
         "start": "09:00", "end": "09:15"},
        {"window_id": "b1", "kind": "break", "start": "09:15", "end": "09:25"},
        {"window_id": "c2", "kind": "class", "class_id": "reading",
         "start": "09:25", "end": "09:40"},
        {"window_id": "b2", "kind": "break", "start": "09:40", "end": "09:50"},
    ] for day in ("mon", "tue", "wed", "thu", "fri")},
}

PROFILES = (
    ChildProfile("ana", "d-ana", activity_level=0.6, talkativeness=0.55, cluster="g1"),
    ChildProfile("bruno", "d-bruno", activity_level=0.4, talkativeness=0.40, cluster="g1"),
    ChildProfile("carla", "d-carla", activity_level=0.7, talkativeness=0.35, cluster="g2"),
    ChildProfile("dino", "d-dino", activity_level=0.3, talkativeness=0.60, cluster="g2"),
)

QUIET_DAY = date(2026, 1, 13)  # second Tuesday: ana goes silent in class


def main() -> None:
    tt_text = json.dumps(TIMETABLE)
    roster = json.dumps({"school_name": "Demo Primary", "children": [
        {"child_id": p.child_id, "device_id": p.device_id} for p in PROFILES]})

    log_path = Path(tempfile.mkdtemp()) / "demo.log"
    service = AwarenessService(log_path, tt_text, None, roster, fsync=False)

    config = SimConfig(
        seed=7, profiles=PROFILES, days=7, timetable_text=tt_text,
        start_date=date(2026, 1, 5), sample_rate=160,
        anomalies=(parse_anomaly_spec(
            f"child=ana,date={QUIET_DAY},kind=verbal,factor=0"),),
    )
    tt = parse_timetable(tt_text)

    day, generated = config.start_date, 0
    while generated < config.days:
        batches = generate_day(config, tt, {}, day)
        if batches:
            generated += 1
            for batch in batches:
                if batch["endpoint"].endswith("features"):
                    service.ingest_features(batch["body"])
                elif batch["endpoint"].endswith("proximity"):
                    service.ingest_proximity(batch["body"])
                else:
                    service.submit_selfreport(batch["body"])
        day += timedelta(days=1)

    print(f"ingested {service.log.head_seq} event records "
          f"({log_path.stat().st_size // 1024} KiB log)\n")

    print(f"== ana's cues on the quiet day ({QUIET_DAY}) ==")
    for cue in service.get_cues("ana", QUIET_DAY):
        value = "-" if cue["value"] is None else f"{cue['value']:.3f}"
        base = cue["baseline"]
        baseline = "-" if base is None else f"{base['mean']:.3f} (n={base['n']})"
        print(f"  {cue['window_id']:10s} {cue['kind']:8s} value={value:7s} "
              f"baseline={baseline:15s} level={cue['deviation']['level']}")

    graph = service.get_graph(QUIET_DAY)
    print("\n== who spent breaks together ==")
    for edge in graph["edges"]:
        print(f"  {edge['a']} -- {edge['b']}: {edge['minutes']:.0f} min")

    service.annotate_cue(f"ana:{QUIET_DAY}:c1:verbal", "ms-reis",
                         "unusually quiet, checked in after class")
    annotated = [c for c in service.get_cues("ana", QUIET_DAY)
                 if c["annotations"]]
    print(f"\nteacher annotation visible on {annotated[0]['cue_key']}:")
    print(f"  {annotated[0]['annotations'][0]['text']!r}")
    service.close()


if __name__ == "__main__":
    main()
