"""Bluetooth co-presence: epoch dedup, daily graphs, per-child social index.

Raw sightings are directional (observer saw peer) and noisy; they collapse
into undirected co-presence at a fixed epoch granularity: a pair is
co-present in an epoch iff at least one sighting in either direction falls
inside it. Epochs are 300 s by default, so one co-present epoch counts as
5 minutes of contact.

The social index deliberately looks only at break windows: in-class
proximity reflects assigned seating, not chosen company.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Iterable, Mapping, Sequence

from .errors import SchemaError, SelfSighting, UnknownDevice
from .schedule import WindowInstance

EPOCH_SECONDS = 300


@dataclass(frozen=True)
class ProximitySighting:
    """One directional Bluetooth sighting; rssi is kept but not thresholded."""

    t: int
    observer: str
    seen: str
    rssi: int | None = None

    def __post_init__(self) -> None:
        if self.observer == self.seen:
            raise SelfSighting(f"device {self.observer!r} cannot sight itself")


@dataclass(frozen=True)
class CoPresence:
    """An unordered device pair co-present in one epoch."""

    pair: tuple[str, str]
    epoch: int

    def __post_init__(self) -> None:
        if self.pair[0] >= self.pair[1]:
            raise SchemaError(f"co-presence pair {self.pair!r} not canonical (a < b)")


@dataclass(frozen=True)
class ProximityGraph:
    """Daily weighted co-presence graph over children (weights in minutes)."""

    date: date
    nodes: tuple[str, ...]
    edges: Mapping[tuple[str, str], float]

    def weight(self, a: str, b: str) -> float:
        return self.edges.get((min(a, b), max(a, b)), 0.0)


@dataclass(frozen=True)
class SocialIndex:
    child: str
    date: date
    distinct_peers: int
    copresence_minutes: float


def epoch_of(t: int, epoch_seconds: int = EPOCH_SECONDS) -> int:
    if epoch_seconds <= 0:
        raise SchemaError("epoch length must be positive")
    return t // epoch_seconds


def canonical_pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


def co_presence(
    sightings: Iterable[ProximitySighting],
    epoch_seconds: int = EPOCH_SECONDS,
) -> set[CoPresence]:
    """Collapse directional sightings into deduplicated (pair, epoch) records.

    One sighting in either direction makes the pair co-present for the
    whole epoch; repeated and reverse sightings add nothing.
    """
    out: set[CoPresence] = set()
    for s in sightings:
        out.add(CoPresence(
            pair=canonical_pair(s.observer, s.seen),
            epoch=epoch_of(s.t, epoch_seconds),
        ))
    return out


def _epoch_overlaps(epoch: int, start: int, end: int, epoch_seconds: int) -> bool:
    """Does epoch interval [k*E, (k+1)*E) intersect [start, end)?"""
    return epoch * epoch_seconds < end and start < (epoch + 1) * epoch_seconds


def daily_graph(
    copresence: Iterable[CoPresence],
    day: date,
    device_to_child: Mapping[str, str],
    day_start: int,
    day_end: int,
    epoch_seconds: int = EPOCH_SECONDS,
) -> ProximityGraph:
    """Weighted child-level graph for one local day.

    Edge weight is co-presence minutes: (epoch length / 60) per co-present
    epoch whose start lies inside the day's [day_start, day_end) bounds.

    Raises:
        UnknownDevice: a sighting mentions a device not in the roster mapping.
    """
    counts: dict[tuple[str, str], int] = {}
    for record in copresence:
        epoch_start = record.epoch * epoch_seconds
        if not (day_start <= epoch_start < day_end):
            continue
        children = []
        for device in record.pair:
            child = device_to_child.get(device)
            if child is None:
                raise UnknownDevice(f"device {device!r} is not registered")
            children.append(child)
        if children[0] == children[1]:
            continue  # both devices belong to one child; not a social tie
        key = canonical_pair(children[0], children[1])
        counts[key] = counts.get(key, 0) + 1

    minutes_per_epoch = epoch_seconds / 60.0
    edges = {pair: count * minutes_per_epoch for pair, count in counts.items()}
    nodes = tuple(sorted(set(device_to_child.values())))
    return ProximityGraph(date=day, nodes=nodes, edges=edges)


def social_index(
    copresence: Iterable[CoPresence],
    child: str,
    break_instances: Sequence[WindowInstance],
    day: date,
    device_to_child: Mapping[str, str],
    epoch_seconds: int = EPOCH_SECONDS,
) -> SocialIndex:
    """Break-time social summary for one child on one date.

    A peer counts once if any shared co-present epoch overlaps a break
    window; minutes sum over all such (peer, epoch) records.
    """
    child_devices = {d for d, c in device_to_child.items() if c == child}
    peers: set[str] = set()
    epoch_records = 0
    for record in copresence:
        a, b = record.pair
        if a in child_devices:
            other_device = b
        elif b in child_devices:
            other_device = a
        else:
            continue
        if not any(
            _epoch_overlaps(record.epoch, w.start, w.end, epoch_seconds)
            for w in break_instances
        ):
            continue
        other_child = device_to_child.get(other_device)
        if other_child is None:
            raise UnknownDevice(f"device {other_device!r} is not registered")
        if other_child == child:
            continue
        peers.add(other_child)
        epoch_records += 1
    return SocialIndex(
        child=child,
        date=day,
        distinct_peers=len(peers),
        copresence_minutes=epoch_records * (epoch_seconds / 60.0),
    )


def graph_to_wire(graph: ProximityGraph) -> dict:
    """Serialize a daily graph: edges listed with a < b, sorted, minutes rounded
    only by float repr (no lossy rounding)."""
    edges = [
        {"a": a, "b": b, "minutes": graph.edges[(a, b)]}
        for a, b in sorted(graph.edges)
    ]
    return {"date": graph.date.isoformat(), "nodes": list(graph.nodes), "edges": edges}
