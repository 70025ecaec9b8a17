"""Per-window activity indices, one-week baselines, and awareness cues.

Three index kinds share one pipeline:

* physical — mean per-second motion count over a break window;
* verbal   — fraction of class-window seconds whose audio RMS clears the
  voicing threshold;
* social   — distinct break-time peers for the day (plus co-presence
  minutes), attached to the pseudo-window "social-day".

Each index is compared to the arithmetic mean of its own trailing
seven-day history (verbal per class, physical pooled over all breaks,
social per day) and classified below / typical / above with a +-25%
ratio band. Everything here is a pure function of an immutable log
snapshot, which is what makes replay determinism testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Iterable, Mapping, Protocol, Sequence

from .errors import KindMismatch
from .features import KIND_AUDIO, KIND_MOTION, SecondFeature
from .proximity import (
    ProximitySighting,
    SocialIndex,
    co_presence,
    epoch_of,
    social_index,
)
from .schedule import (
    KIND_BREAK,
    KIND_CLASS,
    ScheduleOverride,
    Timetable,
    WindowInstance,
    day_bounds,
    obfuscate_location,
    windows_for_day,
)

PHYSICAL = "physical"
VERBAL = "verbal"
SOCIAL = "social"
CUE_KINDS = (PHYSICAL, VERBAL, SOCIAL)

LEVEL_BELOW = "below"
LEVEL_TYPICAL = "typical"
LEVEL_ABOVE = "above"
LEVEL_NO_BASELINE = "no_baseline"

SOCIAL_DAY_WINDOW_ID = "social-day"

BASELINE_DAYS = 7


@dataclass(frozen=True)
class AggregationConfig:
    """Tunables with their deployment defaults."""

    voicing_threshold: float = 0.05   # RMS above this counts a second as voiced
    min_history: int = 3              # windows required before a baseline exists
    band: float = 0.25                # +-25% around the baseline mean is "typical"
    epoch_seconds: int = 300
    low_confidence_below: float = 0.5  # coverage under this flags the cue


DEFAULT_CONFIG = AggregationConfig()


@dataclass(frozen=True)
class ActivityIndex:
    child: str
    date: date
    window_id: str
    kind: str
    value: float | None
    coverage: float
    class_id: str | None = None


@dataclass(frozen=True)
class BaselineKey:
    child: str
    kind: str
    class_id: str | None = None  # set only for verbal


@dataclass(frozen=True)
class Baseline:
    key: BaselineKey
    mean: float
    n: int
    as_of: date


@dataclass(frozen=True)
class DeviationLevel:
    level: str
    ratio: float | None  # None iff no_baseline; math.inf when unbounded


@dataclass(frozen=True)
class CueKey:
    child: str
    date: date
    window_id: str
    kind: str

    def as_string(self) -> str:
        return f"{self.child}:{self.date.isoformat()}:{self.window_id}:{self.kind}"

    @classmethod
    def from_string(cls, text: str) -> "CueKey":
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError(f"bad cue key {text!r}")
        child, date_text, window_id, kind = parts
        return cls(child=child, date=date.fromisoformat(date_text),
                   window_id=window_id, kind=kind)


@dataclass(frozen=True)
class AwarenessCue:
    key: CueKey
    index: ActivityIndex
    baseline: Baseline | None
    deviation: DeviationLevel
    location: str
    annotations: tuple[Mapping, ...]
    low_confidence: bool
    window_start: int
    window_end: int
    social: SocialIndex | None = None


class LogSnapshot(Protocol):
    """Read-only view of the event log that cue assembly derives from."""

    def device_of(self, child: str) -> str: ...

    def device_to_child(self) -> Mapping[str, str]: ...

    def features_in(self, device: str, kind: str, start: int, end: int
                    ) -> list[SecondFeature]: ...

    def sightings_between(self, start: int, end: int) -> list[ProximitySighting]: ...

    def annotations_for(self, cue_key: str) -> tuple[Mapping, ...]: ...

    def last_seen_before(self, child: str, t: int) -> int | None: ...


def compute_index(
    features: Iterable[SecondFeature],
    w: WindowInstance,
    kind: str,
    config: AggregationConfig = DEFAULT_CONFIG,
) -> ActivityIndex:
    """Index one window from per-second features.

    Only features inside [w.start, w.end) with the matching sensor kind
    contribute; duplicate timestamps collapse to the last value seen.
    Coverage is contributing seconds over window length, and the value is
    undefined (None) exactly when coverage is zero.

    Raises:
        KindMismatch: physical over a class window or verbal over a break.
    """
    if kind == PHYSICAL:
        if w.kind != KIND_BREAK:
            raise KindMismatch("physical index requires a break window")
        sensor_kind = KIND_MOTION
    elif kind == VERBAL:
        if w.kind != KIND_CLASS:
            raise KindMismatch("verbal index requires a class window")
        sensor_kind = KIND_AUDIO
    else:
        raise KindMismatch(f"compute_index handles physical/verbal, got {kind!r}")

    by_second: dict[int, float] = {}
    for f in features:
        if f.kind != sensor_kind or not w.contains(f.t):
            continue
        by_second[f.t] = f.value

    n = len(by_second)
    length = w.end - w.start
    coverage = n / length if length > 0 else 0.0
    if n == 0:
        value = None
    elif kind == PHYSICAL:
        value = math.fsum(by_second.values()) / n
    else:
        voiced = sum(1 for v in by_second.values() if v >= config.voicing_threshold)
        value = voiced / n
    return ActivityIndex(
        child="", date=w.date, window_id=w.window_id, kind=kind,
        value=value, coverage=coverage, class_id=w.class_id,
    )


def _matches_key(index: ActivityIndex, key: BaselineKey) -> bool:
    if index.kind != key.kind or index.child != key.child:
        return False
    if key.kind == VERBAL:
        return index.class_id == key.class_id
    return True


def baseline_for(
    history: Iterable[ActivityIndex],
    key: BaselineKey,
    as_of: date,
    min_history: int = DEFAULT_CONFIG.min_history,
) -> Baseline | None:
    """Mean of the key's defined index values over the trailing 7 days.

    The window is [as_of - 7 days, as_of - 1 day]: the current day never
    feeds its own baseline. Returns None when fewer than ``min_history``
    values contribute.
    """
    lo = as_of - timedelta(days=BASELINE_DAYS)
    hi = as_of - timedelta(days=1)
    values = [
        idx.value for idx in history
        if _matches_key(idx, key) and idx.value is not None and lo <= idx.date <= hi
    ]
    if len(values) < min_history:
        return None
    return Baseline(key=key, mean=math.fsum(values) / len(values),
                    n=len(values), as_of=as_of)


def deviation_level(
    v: float | None,
    b: Baseline | None,
    band: float = DEFAULT_CONFIG.band,
) -> DeviationLevel:
    """Classify a value against its baseline with a +-band ratio rule.

    No value or no baseline yields no_baseline. A zero baseline mean is
    degenerate: a zero value is typical (ratio 1 by convention), a positive
    one is above with an unbounded ratio.
    """
    if v is None or b is None:
        return DeviationLevel(level=LEVEL_NO_BASELINE, ratio=None)
    if b.mean == 0:
        if v == 0:
            return DeviationLevel(level=LEVEL_TYPICAL, ratio=1.0)
        return DeviationLevel(level=LEVEL_ABOVE, ratio=math.inf)
    ratio = v / b.mean
    if ratio < 1.0 - band:
        level = LEVEL_BELOW
    elif ratio > 1.0 + band:
        level = LEVEL_ABOVE
    else:
        level = LEVEL_TYPICAL
    return DeviationLevel(level=level, ratio=ratio)


# -- per-day index extraction --------------------------------------------

def _window_indices(
    snapshot: LogSnapshot,
    tt: Timetable,
    overrides: Mapping[date, ScheduleOverride],
    child: str,
    day: date,
    config: AggregationConfig,
) -> list[tuple[WindowInstance, ActivityIndex]]:
    """Physical and verbal indices for every effective window of a date."""
    device = snapshot.device_of(child)
    out = []
    for w in windows_for_day(tt, overrides, day):
        if w.kind == KIND_BREAK:
            kind, sensor = PHYSICAL, KIND_MOTION
        else:
            kind, sensor = VERBAL, KIND_AUDIO
        features = snapshot.features_in(device, sensor, w.start, w.end)
        idx = compute_index(features, w, kind, config)
        out.append((w, _with_child(idx, child)))
    return out


def _with_child(index: ActivityIndex, child: str) -> ActivityIndex:
    return ActivityIndex(
        child=child, date=index.date, window_id=index.window_id, kind=index.kind,
        value=index.value, coverage=index.coverage, class_id=index.class_id,
    )


def _social_for_day(
    snapshot: LogSnapshot,
    tt: Timetable,
    overrides: Mapping[date, ScheduleOverride],
    child: str,
    day: date,
    config: AggregationConfig,
) -> tuple[ActivityIndex, SocialIndex]:
    """Daily social index plus its epoch-coverage wrapper.

    Coverage counts break epochs in which the child's device shows up in
    at least one sighting (either direction), over all break epochs of the
    date; with zero coverage the index value is undefined.
    """
    device = snapshot.device_of(child)
    start, end = day_bounds(tt, day)
    instances = windows_for_day(tt, overrides, day)
    breaks = [w for w in instances if w.kind == KIND_BREAK]

    break_epochs: set[int] = set()
    for w in breaks:
        first = epoch_of(w.start, config.epoch_seconds)
        last = epoch_of(w.end - 1, config.epoch_seconds)
        break_epochs.update(range(first, last + 1))

    sightings = snapshot.sightings_between(start, end)
    records = co_presence(sightings, config.epoch_seconds)
    social = social_index(records, child, breaks, day,
                          snapshot.device_to_child(), config.epoch_seconds)

    seen_epochs = {
        epoch_of(s.t, config.epoch_seconds)
        for s in sightings
        if device in (s.observer, s.seen)
    }
    covered = len(break_epochs & seen_epochs)
    coverage = covered / len(break_epochs) if break_epochs else 0.0
    value = float(social.distinct_peers) if coverage > 0 else None
    index = ActivityIndex(
        child=child, date=day, window_id=SOCIAL_DAY_WINDOW_ID, kind=SOCIAL,
        value=value, coverage=coverage,
    )
    return index, social


def history_indices(
    snapshot: LogSnapshot,
    tt: Timetable,
    overrides: Mapping[date, ScheduleOverride],
    child: str,
    as_of: date,
    config: AggregationConfig = DEFAULT_CONFIG,
) -> list[ActivityIndex]:
    """All of a child's indices over the trailing seven days before as_of."""
    out: list[ActivityIndex] = []
    for back in range(BASELINE_DAYS, 0, -1):
        day = as_of - timedelta(days=back)
        out.extend(idx for _, idx in _window_indices(snapshot, tt, overrides, child, day, config))
        social_idx, _ = _social_for_day(snapshot, tt, overrides, child, day, config)
        out.append(social_idx)
    return out


def _baseline_key(index: ActivityIndex) -> BaselineKey:
    if index.kind == VERBAL:
        return BaselineKey(child=index.child, kind=VERBAL, class_id=index.class_id)
    return BaselineKey(child=index.child, kind=index.kind)


def assemble_cues(
    snapshot: LogSnapshot,
    tt: Timetable,
    overrides: Mapping[date, ScheduleOverride],
    child: str,
    day: date,
    config: AggregationConfig = DEFAULT_CONFIG,
) -> list[AwarenessCue]:
    """Every cue for (child, date): one physical per break, one verbal per
    class, one social for the day.

    Deterministic and side-effect free: the same log snapshot, timetable,
    and overrides always produce the same cue list. Ordering is window
    start, then kind.

    Raises:
        UnknownChild: the child is not in the roster.
    """
    history = history_indices(snapshot, tt, overrides, child, day, config)

    cues: list[AwarenessCue] = []
    window_index_pairs = _window_indices(snapshot, tt, overrides, child, day, config)
    for w, index in window_index_pairs:
        cues.append(_build_cue(snapshot, tt, overrides, index, history,
                               w.start, w.end, config))

    social_idx, social = _social_for_day(snapshot, tt, overrides, child, day, config)
    if window_index_pairs:
        pseudo_start = window_index_pairs[0][0].start
        pseudo_end = window_index_pairs[-1][0].end
    else:
        pseudo_start, pseudo_end = day_bounds(tt, day)
    cues.append(_build_cue(snapshot, tt, overrides, social_idx, history,
                           pseudo_start, pseudo_end, config, social=social))

    cues.sort(key=lambda c: (c.window_start, c.key.kind))
    return cues


def _build_cue(
    snapshot: LogSnapshot,
    tt: Timetable,
    overrides: Mapping[date, ScheduleOverride],
    index: ActivityIndex,
    history: Sequence[ActivityIndex],
    window_start: int,
    window_end: int,
    config: AggregationConfig,
    social: SocialIndex | None = None,
) -> AwarenessCue:
    key = CueKey(child=index.child, date=index.date,
                 window_id=index.window_id, kind=index.kind)
    baseline = baseline_for(history, _baseline_key(index), index.date, config.min_history)
    deviation = deviation_level(index.value, baseline, config.band)
    last_seen = snapshot.last_seen_before(index.child, window_start)
    location = obfuscate_location(tt, overrides, last_seen, window_start)
    return AwarenessCue(
        key=key,
        index=index,
        baseline=baseline,
        deviation=deviation,
        location=location,
        annotations=snapshot.annotations_for(key.as_string()),
        low_confidence=index.coverage < config.low_confidence_below,
        window_start=window_start,
        window_end=window_end,
        social=social,
    )
