"""Simulator configuration: child behavior profiles and anomaly specs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from typing import Mapping, Sequence

from ..errors import SchemaError, UnknownChild

ANOMALY_KINDS = ("verbal", "physical", "social")


@dataclass(frozen=True)
class ChildProfile:
    """Ground-truth behavior parameters for one simulated child."""

    child_id: str
    device_id: str
    activity_level: float   # mean per-second motion count during breaks
    talkativeness: float    # probability a class second is voiced
    cluster: str            # friendship group for proximity generation

    def __post_init__(self) -> None:
        if self.activity_level < 0:
            raise SchemaError(f"{self.child_id}: activity_level must be >= 0")
        if not (0.0 <= self.talkativeness <= 1.0):
            raise SchemaError(f"{self.child_id}: talkativeness must be in [0, 1]")


@dataclass(frozen=True)
class AnomalySpec:
    """Multiply one profile parameter by ``factor`` on one date only."""

    child: str
    date: date
    kind: str
    factor: float

    def __post_init__(self) -> None:
        if self.kind not in ANOMALY_KINDS:
            raise SchemaError(f"anomaly kind must be one of {ANOMALY_KINDS}")
        if self.factor < 0:
            raise SchemaError("anomaly factor must be >= 0")


@dataclass(frozen=True)
class SimConfig:
    seed: int
    profiles: tuple[ChildProfile, ...]
    days: int
    timetable_text: str
    start_date: date
    overrides_text: str | None = None
    server_url: str | None = None
    token: str | None = None
    dry_run_dir: str | None = None
    compress: float = 0.0            # simulated seconds per real second; 0 = no pacing
    p_meet_intra: float = 0.8
    p_meet_cross: float = 0.05
    sample_rate: int = 8000
    anomalies: tuple[AnomalySpec, ...] = ()

    def __post_init__(self) -> None:
        if self.days < 0:
            raise SchemaError("days must be >= 0")
        if not (0.0 <= self.p_meet_intra <= 1.0) or not (0.0 <= self.p_meet_cross <= 1.0):
            raise SchemaError("meeting probabilities must be in [0, 1]")
        if self.sample_rate <= 0:
            raise SchemaError("sample_rate must be positive")
        clusters = {p.child_id for p in self.profiles}
        if len(clusters) != len(self.profiles):
            raise SchemaError("duplicate child_id in profiles")


def parse_profiles(document: str | Sequence) -> tuple[ChildProfile, ...]:
    """Profiles file: JSON array of child profile objects."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"profiles file is not valid JSON: {exc}") from None
    if not isinstance(document, Sequence):
        raise SchemaError("profiles document must be a JSON array")
    profiles = []
    for entry in document:
        if not isinstance(entry, Mapping):
            raise SchemaError("profile entry must be an object")
        try:
            profiles.append(ChildProfile(
                child_id=str(entry["child_id"]),
                device_id=str(entry.get("device_id", f"d-{entry['child_id']}")),
                activity_level=float(entry["activity_level"]),
                talkativeness=float(entry["talkativeness"]),
                cluster=str(entry.get("cluster", "all")),
            ))
        except KeyError as missing:
            raise SchemaError(f"profile entry missing field {missing}") from None
    return tuple(profiles)


def parse_anomaly_spec(text: str) -> AnomalySpec:
    """Parse the CLI form ``child=ID,date=YYYY-MM-DD,kind=verbal,factor=0``."""
    fields: dict[str, str] = {}
    for part in text.split(","):
        if "=" not in part:
            raise SchemaError(f"bad anomaly fragment {part!r}")
        key, _, value = part.partition("=")
        fields[key.strip()] = value.strip()
    missing = {"child", "date", "kind", "factor"} - set(fields)
    if missing:
        raise SchemaError(f"anomaly spec missing {sorted(missing)}")
    try:
        day = date.fromisoformat(fields["date"])
    except ValueError:
        raise SchemaError(f"bad anomaly date {fields['date']!r}") from None
    try:
        factor = float(fields["factor"])
    except ValueError:
        raise SchemaError(f"bad anomaly factor {fields['factor']!r}") from None
    return AnomalySpec(child=fields["child"], date=day,
                       kind=fields["kind"], factor=factor)


def check_anomalies(anomalies: Sequence[AnomalySpec],
                    profiles: Sequence[ChildProfile]) -> None:
    known = {p.child_id for p in profiles}
    for spec in anomalies:
        if spec.child not in known:
            raise UnknownChild(f"anomaly targets unknown child {spec.child!r}")
