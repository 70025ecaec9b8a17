"""Event records, the newline-delimited JSON codec, and payload validation.

The service persists exactly one thing: an append-only sequence of event
records, each one line of canonical JSON (sorted keys, compact separators,
UTF-8). ``decode_line(encode_record(r)) == r`` for every valid record, and
all served state is recomputable from the record sequence alone.

Validation here is deliberately strict and privacy-first: any payload
containing a forbidden key (raw audio buffers, precise coordinates) is
rejected before anything touches the log, whatever else is wrong with it.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Mapping

from .errors import DecodeError, EmptyText, PrivacyViolation, SchemaError, SelfSighting

TYPE_FEATURES = "features"
TYPE_PROXIMITY = "proximity"
TYPE_SELFREPORT = "selfreport"
TYPE_ANNOTATION = "annotation"
TYPE_MESSAGE = "message"
EVENT_TYPES = (TYPE_FEATURES, TYPE_PROXIMITY, TYPE_SELFREPORT,
               TYPE_ANNOTATION, TYPE_MESSAGE)

FORBIDDEN_KEYS = frozenset({
    "pcm", "audio", "wave", "samples",
    "lat", "lon", "latitude", "longitude", "gps",
})

EMOTION_CATALOG = {
    "e1": "happy",
    "e2": "calm",
    "e3": "tired",
    "e4": "sad",
    "e5": "angry",
}

MESSAGE_ROLES = ("teacher", "parent")

MAX_TEXT_LEN = 2000

_ID_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


@dataclass(frozen=True)
class EventRecord:
    """One totally ordered log entry. seq starts at 1 and is gapless."""

    seq: int
    t_recv: int
    type: str
    payload: dict


def encode_record(record: EventRecord) -> str:
    """One canonical JSON line (no trailing newline)."""
    doc = {
        "seq": record.seq,
        "t_recv": record.t_recv,
        "type": record.type,
        "payload": record.payload,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True,
                      allow_nan=False)


def decode_line(line: str) -> EventRecord:
    """Parse one log line back into an EventRecord.

    Raises:
        DecodeError: malformed JSON, wrong field types, or unknown type tag.
    """
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DecodeError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DecodeError("record line must be a JSON object")
    seq = doc.get("seq")
    t_recv = doc.get("t_recv")
    rtype = doc.get("type")
    payload = doc.get("payload")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 1:
        raise DecodeError(f"bad seq {seq!r}")
    if not isinstance(t_recv, int) or isinstance(t_recv, bool):
        raise DecodeError(f"bad t_recv {t_recv!r}")
    if rtype not in EVENT_TYPES:
        raise DecodeError(f"unknown event type {rtype!r}")
    if not isinstance(payload, dict):
        raise DecodeError("payload must be an object")
    return EventRecord(seq=seq, t_recv=t_recv, type=rtype, payload=payload)


def find_forbidden_key(obj: object, path: str = "") -> str | None:
    """Depth-first scan for the first forbidden key anywhere in a document.

    Only keys are checked: 'audio' as a *value* (e.g. a feature kind) is
    fine, a key named 'audio' is not.
    """
    if isinstance(obj, Mapping):
        for key, value in obj.items():
            key_path = f"{path}.{key}" if path else str(key)
            if isinstance(key, str) and key.lower() in FORBIDDEN_KEYS:
                return key_path
            found = find_forbidden_key(value, key_path)
            if found:
                return found
    elif isinstance(obj, (list, tuple)):
        for i, item in enumerate(obj):
            found = find_forbidden_key(item, f"{path}[{i}]")
            if found:
                return found
    return None


def check_privacy(payload: Mapping) -> None:
    """Raise PrivacyViolation if the payload carries any forbidden key."""
    found = find_forbidden_key(payload)
    if found is not None:
        raise PrivacyViolation(f"forbidden key at {found}")


# -- per-type payload validation -----------------------------------------

def _require_id(payload: Mapping, field: str) -> str:
    value = payload.get(field)
    if not isinstance(value, str) or not _ID_RE.match(value):
        raise SchemaError(f"{field!r} must be an identifier, got {value!r}")
    return value


def _require_int(obj: Mapping, field: str) -> int:
    value = obj.get(field)
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaError(f"{field!r} must be an integer, got {value!r}")
    return value


def _require_number(obj: Mapping, field: str) -> float:
    value = obj.get(field)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{field!r} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise SchemaError(f"{field!r} must be finite")
    return float(value)


def _require_text(payload: Mapping, field: str) -> str:
    value = payload.get(field)
    if not isinstance(value, str):
        raise SchemaError(f"{field!r} must be a string")
    if not value.strip():
        raise EmptyText(f"{field!r} must be non-empty")
    if len(value) > MAX_TEXT_LEN:
        raise SchemaError(f"{field!r} exceeds {MAX_TEXT_LEN} characters")
    return value


def validate_features_payload(payload: Mapping) -> None:
    """Shape check for a feature ingestion batch (registry checks are separate)."""
    check_privacy(payload)
    _require_id(payload, "device")
    features = payload.get("features")
    if not isinstance(features, list) or not features:
        raise SchemaError("'features' must be a non-empty array")
    for i, item in enumerate(features):
        if not isinstance(item, Mapping):
            raise SchemaError(f"features[{i}] must be an object")
        _require_int(item, "t")
        kind = item.get("kind")
        if kind not in ("motion", "audio"):
            raise SchemaError(f"features[{i}].kind must be 'motion' or 'audio'")
        value = _require_number(item, "value")
        if value < 0:
            raise SchemaError(f"features[{i}].value must be >= 0")
        if kind == "audio" and value > 1.0:
            raise SchemaError(f"features[{i}].value must be <= 1 for audio")
        extra = set(item) - {"t", "kind", "value"}
        if extra:
            raise SchemaError(f"features[{i}] has unexpected fields {sorted(extra)}")
    extra = set(payload) - {"device", "features"}
    if extra:
        raise SchemaError(f"features payload has unexpected fields {sorted(extra)}")


def validate_proximity_payload(payload: Mapping) -> None:
    """Shape check for a proximity batch. Sightings are directional: the
    batch device is the observer, each entry names the seen device."""
    check_privacy(payload)
    device = _require_id(payload, "device")
    sightings = payload.get("sightings")
    if not isinstance(sightings, list):
        raise SchemaError("'sightings' must be an array")
    for i, item in enumerate(sightings):
        if not isinstance(item, Mapping):
            raise SchemaError(f"sightings[{i}] must be an object")
        _require_int(item, "t")
        seen = _require_id(item, "seen")
        if seen == device:
            raise SelfSighting(f"sightings[{i}]: device {device!r} cannot sight itself")
        if "rssi" in item and item["rssi"] is not None:
            _require_int(item, "rssi")
        extra = set(item) - {"t", "seen", "rssi"}
        if extra:
            raise SchemaError(f"sightings[{i}] has unexpected fields {sorted(extra)}")
    extra = set(payload) - {"device", "sightings"}
    if extra:
        raise SchemaError(f"proximity payload has unexpected fields {sorted(extra)}")


def validate_selfreport_payload(payload: Mapping) -> None:
    check_privacy(payload)
    _require_id(payload, "child")
    _require_int(payload, "t")
    emotion = payload.get("emotion_id")
    if not isinstance(emotion, str):
        raise SchemaError("'emotion_id' must be a string")
    extra = set(payload) - {"child", "t", "emotion_id"}
    if extra:
        raise SchemaError(f"selfreport payload has unexpected fields {sorted(extra)}")


def validate_annotation_payload(payload: Mapping) -> None:
    check_privacy(payload)
    _require_id(payload, "teacher")
    _require_text(payload, "text")
    if not isinstance(payload.get("cue_key"), str):
        raise SchemaError("'cue_key' must be a string")
    _require_int(payload, "t")
    _require_id(payload, "id")


def validate_message_payload(payload: Mapping) -> None:
    check_privacy(payload)
    _require_id(payload, "child")
    _require_text(payload, "text")
    if payload.get("sender_role") not in MESSAGE_ROLES:
        raise SchemaError("'sender_role' must be 'teacher' or 'parent'")
    _require_int(payload, "t")
    _require_id(payload, "id")
