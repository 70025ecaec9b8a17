"""Central awareness service: validated ingestion, derived queries, messaging.

The service owns nothing but an append-only event log plus immutable
startup config (timetable, overrides, roster). Every query is a pure
function of the log prefix, so replaying the file into a fresh instance
answers every query byte-for-byte identically to the live service at the
same head seq. Appends are serialized by one lock; queries read a
consistent state that only ever grows.
"""

from __future__ import annotations

import bisect
import json
import math
import threading
import time
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Callable, Mapping

from . import events
from .aggregation import (
    AggregationConfig,
    AwarenessCue,
    CueKey,
    DEFAULT_CONFIG,
    PHYSICAL,
    SOCIAL,
    SOCIAL_DAY_WINDOW_ID,
    VERBAL,
    assemble_cues,
)
from .errors import (
    BadDate,
    BadRole,
    CueNotFound,
    EmptyText,
    SchemaError,
    UnknownChild,
    UnknownDevice,
    UnknownEmotion,
)
from .eventlog import EventLog
from .events import EventRecord
from .features import SecondFeature
from .proximity import ProximitySighting, co_presence, daily_graph, graph_to_wire
from .schedule import (
    KIND_BREAK,
    KIND_CLASS,
    ScheduleOverride,
    Timetable,
    day_bounds,
    obfuscate_location,
    parse_overrides,
    parse_timetable,
    windows_for_day,
)


@dataclass(frozen=True)
class Registry:
    """Startup roster: children, their single device, optional class lists."""

    school_name: str
    children: tuple[str, ...]
    device_by_child: Mapping[str, str]
    child_by_device: Mapping[str, str]
    classes_by_child: Mapping[str, tuple[str, ...]]

    def device_of(self, child: str) -> str:
        try:
            return self.device_by_child[child]
        except KeyError:
            raise UnknownChild(f"child {child!r} is not registered") from None

    def require_device(self, device: str) -> str:
        try:
            return self.child_by_device[device]
        except KeyError:
            raise UnknownDevice(f"device {device!r} is not registered") from None

    def require_child(self, child: str) -> str:
        if child not in self.device_by_child:
            raise UnknownChild(f"child {child!r} is not registered")
        return child


def parse_roster(document: str | Mapping) -> Registry:
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"roster is not valid JSON: {exc}") from None
    if not isinstance(document, Mapping):
        raise SchemaError("roster must be a JSON object")
    entries = document.get("children")
    if not isinstance(entries, list) or not entries:
        raise SchemaError("roster needs a non-empty 'children' array")
    device_by_child: dict[str, str] = {}
    child_by_device: dict[str, str] = {}
    classes: dict[str, tuple[str, ...]] = {}
    order: list[str] = []
    for entry in entries:
        if not isinstance(entry, Mapping):
            raise SchemaError("roster child entry must be an object")
        child = entry.get("child_id")
        device = entry.get("device_id")
        if not isinstance(child, str) or not isinstance(device, str):
            raise SchemaError("roster entries need child_id and device_id strings")
        if child in device_by_child:
            raise SchemaError(f"duplicate child {child!r} in roster")
        if device in child_by_device:
            raise SchemaError(f"duplicate device {device!r} in roster")
        device_by_child[child] = device
        child_by_device[device] = child
        classes[child] = tuple(entry.get("classes", ()))
        order.append(child)
    return Registry(
        school_name=str(document.get("school_name", "school")),
        children=tuple(order),
        device_by_child=device_by_child,
        child_by_device=child_by_device,
        classes_by_child=classes,
    )


class LogState:
    """Materialized fold of the event log; implements the snapshot protocol
    that cue assembly reads from."""

    def __init__(self, registry: Registry):
        self._registry = registry
        self._features: dict[tuple[str, str], dict[int, float]] = {}
        self._data_ts: dict[str, list[int]] = {}
        self._data_ts_sorted: dict[str, bool] = {}
        self._sightings: list[ProximitySighting] = []
        self._selfreports: dict[str, list[dict]] = {}
        self._annotations: dict[str, list[dict]] = {}
        self._messages: dict[str, list[dict]] = {}

    # -- fold ----------------------------------------------------------

    def apply(self, record: EventRecord) -> None:
        payload = record.payload
        if record.type == events.TYPE_FEATURES:
            device = payload["device"]
            bucket_ts = self._data_ts.setdefault(device, [])
            for item in payload["features"]:
                key = (device, item["kind"])
                self._features.setdefault(key, {})[item["t"]] = float(item["value"])
                bucket_ts.append(item["t"])
            self._data_ts_sorted[device] = False
        elif record.type == events.TYPE_PROXIMITY:
            device = payload["device"]
            for item in payload["sightings"]:
                sighting = ProximitySighting(
                    t=item["t"], observer=device, seen=item["seen"],
                    rssi=item.get("rssi"),
                )
                self._sightings.append(sighting)
                for side in (device, item["seen"]):
                    self._data_ts.setdefault(side, []).append(item["t"])
                    self._data_ts_sorted[side] = False
        elif record.type == events.TYPE_SELFREPORT:
            self._selfreports.setdefault(payload["child"], []).append(
                {"t": payload["t"], "emotion_id": payload["emotion_id"],
                 "seq": record.seq}
            )
        elif record.type == events.TYPE_ANNOTATION:
            self._annotations.setdefault(payload["cue_key"], []).append(
                {"id": payload["id"], "teacher": payload["teacher"],
                 "text": payload["text"], "t": payload["t"]}
            )
        elif record.type == events.TYPE_MESSAGE:
            self._messages.setdefault(payload["child"], []).append(
                {"id": payload["id"], "child": payload["child"],
                 "sender_role": payload["sender_role"], "text": payload["text"],
                 "t": payload["t"], "seq": record.seq, "read": False}
            )

    # -- snapshot protocol ----------------------------------------------

    def device_of(self, child: str) -> str:
        return self._registry.device_of(child)

    def device_to_child(self) -> Mapping[str, str]:
        return self._registry.child_by_device

    def features_in(self, device: str, kind: str, start: int, end: int
                    ) -> list[SecondFeature]:
        table = self._features.get((device, kind))
        if not table:
            return []
        out = []
        for t in range(start, end):
            value = table.get(t)
            if value is not None:
                out.append(SecondFeature(device=device, t=t, kind=kind, value=value))
        return out

    def sightings_between(self, start: int, end: int) -> list[ProximitySighting]:
        return [s for s in self._sightings if start <= s.t < end]

    def annotations_for(self, cue_key: str) -> tuple[Mapping, ...]:
        return tuple(self._annotations.get(cue_key, ()))

    def last_seen_before(self, child: str, t: int) -> int | None:
        device = self._registry.device_of(child)
        ts = self._data_ts.get(device)
        if not ts:
            return None
        if not self._data_ts_sorted.get(device, True):
            ts.sort()
            self._data_ts_sorted[device] = True
        idx = bisect.bisect_right(ts, t)
        return ts[idx - 1] if idx > 0 else None

    def selfreports_for(self, child: str) -> list[dict]:
        return self._selfreports.get(child, [])

    def messages_for(self, child: str) -> list[dict]:
        return self._messages.get(child, [])


def canonical_json(obj: object) -> str:
    """The one JSON form used for every query response: sorted keys, compact
    separators, ASCII. Identical structures give identical bytes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=True, allow_nan=False)


def _serialize_ratio(ratio: float | None) -> object:
    if ratio is None:
        return None
    if math.isinf(ratio):
        return "unbounded"
    return ratio


def serialize_cue(cue: AwarenessCue) -> dict:
    doc = {
        "cue_key": cue.key.as_string(),
        "child": cue.key.child,
        "date": cue.key.date.isoformat(),
        "window_id": cue.key.window_id,
        "kind": cue.key.kind,
        "class_id": cue.index.class_id,
        "window_start": cue.window_start,
        "window_end": cue.window_end,
        "value": cue.index.value,
        "coverage": cue.index.coverage,
        "low_confidence": cue.low_confidence,
        "baseline": None if cue.baseline is None else {
            "mean": cue.baseline.mean,
            "n": cue.baseline.n,
            "as_of": cue.baseline.as_of.isoformat(),
        },
        "deviation": {
            "level": cue.deviation.level,
            "ratio": _serialize_ratio(cue.deviation.ratio),
        },
        "location": cue.location,
        "annotations": list(cue.annotations),
    }
    if cue.social is not None:
        doc["distinct_peers"] = cue.social.distinct_peers
        doc["copresence_minutes"] = cue.social.copresence_minutes
    return doc


def parse_date_param(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except (TypeError, ValueError):
        raise BadDate(f"bad date {text!r}, expected YYYY-MM-DD") from None


class AwarenessService:
    """The service core, independent of any transport.

    One instance per deployment; construct a second instance over the same
    log file (after closing the first) to replay.
    """

    def __init__(
        self,
        log_path: str | Path,
        timetable: Timetable | str,
        overrides: Mapping[date, ScheduleOverride] | str | None,
        roster: Registry | str,
        config: AggregationConfig = DEFAULT_CONFIG,
        clock: Callable[[], int] | None = None,
        fsync: bool = True,
    ):
        self.timetable = parse_timetable(timetable) if isinstance(timetable, str) else timetable
        if overrides is None:
            self.overrides: Mapping[date, ScheduleOverride] = {}
        elif isinstance(overrides, str):
            self.overrides = parse_overrides(overrides)
        else:
            self.overrides = overrides
        self.registry = parse_roster(roster) if isinstance(roster, str) else roster
        self.config = config
        self._clock = clock or (lambda: int(time.time()))
        self._lock = threading.Lock()
        self.state = LogState(self.registry)
        self.log = EventLog(log_path, fsync=fsync)
        self.log.load(self.state.apply)

    # -- ingestion -------------------------------------------------------

    def _append(self, type: str, payload: dict) -> int:
        record = self.log.append(self._clock(), type, payload)
        self.state.apply(record)
        return record.seq

    def ingest_features(self, payload: Mapping) -> int:
        """Validate and append one feature batch; returns the assigned seq.

        Raises PrivacyViolation (forbidden key), SchemaError, UnknownDevice.
        Nothing is appended unless every check passes.
        """
        events.validate_features_payload(payload)
        self.registry.require_device(payload["device"])
        with self._lock:
            return self._append(events.TYPE_FEATURES, dict(payload))

    def ingest_proximity(self, payload: Mapping) -> int:
        events.validate_proximity_payload(payload)
        self.registry.require_device(payload["device"])
        for item in payload["sightings"]:
            self.registry.require_device(item["seen"])
        with self._lock:
            return self._append(events.TYPE_PROXIMITY, dict(payload))

    def submit_selfreport(self, payload: Mapping) -> int:
        events.validate_selfreport_payload(payload)
        self.registry.require_child(payload["child"])
        if payload["emotion_id"] not in events.EMOTION_CATALOG:
            raise UnknownEmotion(f"emotion {payload['emotion_id']!r} not in catalog")
        with self._lock:
            return self._append(events.TYPE_SELFREPORT, dict(payload))

    def annotate_cue(self, cue_key: str, teacher: str, text: str,
                     t: int | None = None) -> str:
        """Attach teacher text to a cue; returns the annotation id.

        The cue key must name an effective window (or the social-day
        pseudo-window) of its date with the matching cue kind.
        """
        if not isinstance(text, str) or not text.strip():
            raise EmptyText("annotation text must be non-empty")
        self._resolve_cue_key(cue_key)
        with self._lock:
            annotation_id = f"a{self.log.head_seq + 1:012d}"
            payload = {
                "id": annotation_id,
                "cue_key": cue_key,
                "teacher": teacher,
                "text": text,
                "t": self._clock() if t is None else t,
            }
            events.validate_annotation_payload(payload)
            self._append(events.TYPE_ANNOTATION, payload)
            return annotation_id

    def post_message(self, child: str, sender_role: str, text: str,
                     t: int | None = None) -> str:
        if sender_role not in events.MESSAGE_ROLES:
            raise BadRole(f"sender_role must be one of {events.MESSAGE_ROLES}")
        if not isinstance(text, str) or not text.strip():
            raise EmptyText("message text must be non-empty")
        self.registry.require_child(child)
        with self._lock:
            message_id = f"m{self.log.head_seq + 1:012d}"
            payload = {
                "id": message_id,
                "child": child,
                "sender_role": sender_role,
                "text": text,
                "t": self._clock() if t is None else t,
            }
            events.validate_message_payload(payload)
            self._append(events.TYPE_MESSAGE, payload)
            return message_id

    def _resolve_cue_key(self, cue_key: str) -> CueKey:
        try:
            key = CueKey.from_string(cue_key)
        except ValueError:
            raise CueNotFound(f"malformed cue key {cue_key!r}") from None
        if key.child not in self.registry.device_by_child:
            raise CueNotFound(f"no cue for unknown child {key.child!r}")
        if key.kind == SOCIAL:
            if key.window_id != SOCIAL_DAY_WINDOW_ID:
                raise CueNotFound(f"social cues live on {SOCIAL_DAY_WINDOW_ID!r}")
            return key
        expected_window_kind = KIND_BREAK if key.kind == PHYSICAL else (
            KIND_CLASS if key.kind == VERBAL else None)
        if expected_window_kind is None:
            raise CueNotFound(f"unknown cue kind {key.kind!r}")
        for w in windows_for_day(self.timetable, self.overrides, key.date):
            if w.window_id == key.window_id and w.kind == expected_window_kind:
                return key
        raise CueNotFound(
            f"no effective {key.kind} window {key.window_id!r} on {key.date}"
        )

    # -- queries ----------------------------------------------------------

    def get_cues(self, child: str, day: date) -> list[dict]:
        self.registry.require_child(child)
        cues = assemble_cues(self.state, self.timetable, self.overrides,
                             child, day, self.config)
        return [serialize_cue(c) for c in cues]

    def get_graph(self, day: date) -> dict:
        start, end = day_bounds(self.timetable, day)
        records = co_presence(self.state.sightings_between(start, end),
                              self.config.epoch_seconds)
        graph = daily_graph(records, day, self.registry.child_by_device,
                            start, end, self.config.epoch_seconds)
        return graph_to_wire(graph)

    def get_messages(self, child: str, since: int | None = None) -> list[dict]:
        self.registry.require_child(child)
        msgs = self.state.messages_for(child)
        if since is not None:
            msgs = [m for m in msgs if m["seq"] > since]
        return sorted(msgs, key=lambda m: (m["t"], m["id"]))

    def get_location(self, child: str, at: int) -> str:
        self.registry.require_child(child)
        last_seen = self.state.last_seen_before(child, at)
        return obfuscate_location(self.timetable, self.overrides, last_seen, at)

    def get_selfreports(self, child: str, day: date) -> list[dict]:
        self.registry.require_child(child)
        start, end = day_bounds(self.timetable, day)
        reports = [
            {**r, "label": events.EMOTION_CATALOG[r["emotion_id"]]}
            for r in self.state.selfreports_for(child)
            if start <= r["t"] < end
        ]
        return sorted(reports, key=lambda r: r["seq"])

    def meta(self) -> dict:
        return {
            "school_name": self.registry.school_name,
            "timezone": self.timetable.timezone,
            "emotions": [
                {"id": eid, "label": label}
                for eid, label in sorted(events.EMOTION_CATALOG.items())
            ],
            "children": [
                {"child_id": c, "classes": list(self.registry.classes_by_child[c])}
                for c in self.registry.children
            ],
        }

    def close(self) -> None:
        self.log.close()
