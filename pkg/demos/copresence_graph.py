#!/usr/bin/env python3
"""From raw Bluetooth sightings to a daily social graph.

Three children: two friends who meet during both breaks, and a third who
only appears next to them during class (assigned seating, so the social
index ignores it).
"""

from datetime import date, datetime
from zoneinfo import ZoneInfo

from senseme.proximity import ProximitySighting, co_presence, daily_graph, social_index
from senseme.schedule import WindowInstance

ZONE = ZoneInfo("Europe/Lisbon")
DAY = date(2026, 1, 5)
DEVICES = {"d-ana": "ana", "d-bruno": "bruno", "d-carla": "carla"}


def at(hhmm: str) -> int:
    hh, mm = hhmm.split(":")
    return int(datetime(DAY.year, DAY.month, DAY.day, int(hh), int(mm),
                        tzinfo=ZONE).timestamp())


def main() -> None:
    breaks = [
        WindowInstance(DAY, "b1", "break", at("10:00"), at("10:30")),
        WindowInstance(DAY, "b2", "break", at("15:00"), at("15:15")),
    ]
    sightings = [
        # ana and bruno, both breaks, scans in both directions
        ProximitySighting(at("10:02"), "d-ana", "d-bruno", rssi=-48),
        ProximitySighting(at("10:09"), "d-bruno", "d-ana", rssi=-51),
        ProximitySighting(at("10:21"), "d-ana", "d-bruno", rssi=-45),
        ProximitySighting(at("15:03"), "d-bruno", "d-ana", rssi=-60),
        # carla sits next to ana in class only
        ProximitySighting(at("11:12"), "d-carla", "d-ana", rssi=-40),
        ProximitySighting(at("11:17"), "d-ana", "d-carla", rssi=-42),
    ]

    records = co_presence(sightings, 300)
    print(f"{len(sightings)} sightings collapse to {len(records)} co-presence epochs:")
    for record in sorted(records, key=lambda r: (r.epoch, r.pair)):
        print(f"  epoch {record.epoch}  pair {record.pair}")

    day_start, day_end = at("00:00"), at("00:00") + 86400
    graph = daily_graph(records, DAY, DEVICES, day_start, day_end)
    print("\ndaily graph (minutes together, class or break):")
    for (a, b), minutes in sorted(graph.edges.items()):
        print(f"  {a} -- {b}: {minutes:.0f} min")

    print("\nbreak-time social index (class-time proximity ignored):")
    for child in sorted(DEVICES.values()):
        idx = social_index(records, child, breaks, DAY, DEVICES)
        print(f"  {child:6s} peers={idx.distinct_peers} "
              f"minutes={idx.copresence_minutes:.0f}")


if __name__ == "__main__":
    main()
