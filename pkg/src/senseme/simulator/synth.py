"""Signal synthesis: raw samples in, real feature extraction out.

The simulator never shortcuts to feature scalars. Motion seconds become
accelerometer samples shaped so the extraction math recovers the drawn
count exactly; voiced class seconds become integer-cycle sine frames
whose RMS is amplitude / sqrt(2); silence is a true all-zero frame. Every
batch the simulator posts went through the same code a device would run,
which keeps the privacy boundary honest end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Mapping, Sequence

from ..features import (
    AccelSample,
    AudioFrame,
    KIND_AUDIO,
    KIND_MOTION,
    audio_rms,
    motion_count,
    silent_frame,
    sine_frame,
)
from ..proximity import EPOCH_SECONDS, epoch_of
from ..schedule import (
    KIND_BREAK,
    KIND_CLASS,
    ScheduleOverride,
    Timetable,
    WindowInstance,
    windows_for_day,
)
from .profiles import AnomalySpec, ChildProfile, SimConfig
from .rng import SplitMix64, stream

# Keep synthesized samples inside the accelerometer range guard.
_MAX_MOTION_COUNT = 14.0

_VOICED_AMPLITUDE = (0.1, 0.9)
_VOICED_CYCLES = (5, 40)

EMOTION_IDS = ("e1", "e2", "e3", "e4", "e5")


@dataclass(frozen=True)
class DayParams:
    """Effective per-date parameters after anomaly injection."""

    activity_level: float
    talkativeness: float
    meet_factor: float


def inject_anomaly(
    spec_list: Sequence[AnomalySpec],
    profile: ChildProfile,
    day: date,
) -> DayParams:
    """Apply any matching anomaly factors to one child's parameters for one date."""
    activity = profile.activity_level
    talk = profile.talkativeness
    meet = 1.0
    for spec in spec_list:
        if spec.child != profile.child_id or spec.date != day:
            continue
        if spec.kind == "physical":
            activity *= spec.factor
        elif spec.kind == "verbal":
            talk = min(1.0, talk * spec.factor)
        elif spec.kind == "social":
            meet = spec.factor
    return DayParams(activity_level=activity, talkativeness=talk, meet_factor=meet)


def synthesize_second(
    kind: str,
    t: int,
    params: DayParams,
    rng: SplitMix64,
    sample_rate: int,
) -> AccelSample | AudioFrame:
    """One second of raw signal for one child.

    Motion: a count c ~ exponential(activity_level) emitted as the sample
    (0, 0, 1 + c), so magnitude-minus-gravity recovers c exactly. Audio: a
    voiced second (probability = talkativeness) is an integer-cycle sine
    with amplitude uniform in [0.1, 0.9], RMS amplitude/sqrt(2) >= 0.0707;
    an unvoiced second is all zeros.
    """
    if kind == KIND_MOTION:
        count = min(rng.exponential(params.activity_level), _MAX_MOTION_COUNT)
        return AccelSample(t=t, ax=0.0, ay=0.0, az=1.0 + count)
    if kind == KIND_AUDIO:
        if rng.chance(params.talkativeness):
            amplitude = rng.uniform(*_VOICED_AMPLITUDE)
            cycles = rng.randint(*_VOICED_CYCLES)
            phase = rng.uniform(0.0, 2.0 * math.pi)
            return sine_frame(t, amplitude, cycles, phase, sample_rate)
        return silent_frame(t, sample_rate)
    raise ValueError(f"unknown signal kind {kind!r}")


def _window_features(
    profile: ChildProfile,
    window: WindowInstance,
    params: DayParams,
    seed: int,
    sample_rate: int,
) -> list[dict]:
    """Per-second features for one child and one window, on the wire shape."""
    if window.kind == KIND_BREAK:
        kind = KIND_MOTION
    else:
        kind = KIND_AUDIO
    rng = stream(seed, "signal", kind, profile.child_id, window.date.isoformat(),
                 window.window_id)
    out = []
    for t in range(window.start, window.end):
        raw = synthesize_second(kind, t, params, rng, sample_rate)
        if kind == KIND_MOTION:
            value = motion_count(raw)
        else:
            value = audio_rms(raw)
        out.append({"t": t, "kind": kind, "value": value})
    return out


def _break_epoch_spans(breaks: Sequence[WindowInstance]) -> list[tuple[int, int, int]]:
    """(epoch, overlap_start, overlap_end) for every epoch touching a break."""
    spans = []
    for w in breaks:
        first = epoch_of(w.start, EPOCH_SECONDS)
        last = epoch_of(w.end - 1, EPOCH_SECONDS)
        for k in range(first, last + 1):
            lo = max(w.start, k * EPOCH_SECONDS)
            hi = min(w.end, (k + 1) * EPOCH_SECONDS)
            spans.append((k, lo, hi))
    return spans


def generate_day(
    config: SimConfig,
    tt: Timetable,
    overrides: Mapping[date, ScheduleOverride],
    day: date,
) -> list[dict]:
    """Every batch the school produces on one date, in posting order.

    Children emit motion features for each break second and audio features
    for each class second; pairs meet per break epoch with the
    cluster-dependent probability; each child files one self-report.
    Output is a list of {"endpoint", "body", "t0"} documents sorted by
    (t0, endpoint, device), fully determined by (seed, config, date).
    """
    instances = windows_for_day(tt, overrides, day)
    if not instances:
        return []
    breaks = [w for w in instances if w.kind == KIND_BREAK]
    profiles = sorted(config.profiles, key=lambda p: p.child_id)
    params_by_child = {
        p.child_id: inject_anomaly(config.anomalies, p, day) for p in profiles
    }

    batches: list[dict] = []

    for profile in profiles:
        params = params_by_child[profile.child_id]
        for window in instances:
            features = _window_features(profile, window, params, config.seed,
                                        config.sample_rate)
            batches.append({
                "endpoint": "/api/v1/ingest/features",
                "body": {"device": profile.device_id, "features": features},
                "t0": window.start,
            })

    # Pairwise meetings, one draw per (pair, break epoch).
    sightings_by_device: dict[str, list[dict]] = {}
    spans = _break_epoch_spans(breaks)
    for i, a in enumerate(profiles):
        for b in profiles[i + 1:]:
            pair_rng = stream(config.seed, "meet", day.isoformat(),
                              a.child_id, b.child_id)
            base = config.p_meet_intra if a.cluster == b.cluster else config.p_meet_cross
            p = min(1.0, base
                    * params_by_child[a.child_id].meet_factor
                    * params_by_child[b.child_id].meet_factor)
            for epoch, lo, hi in spans:
                if not pair_rng.chance(p):
                    continue
                t = pair_rng.randint(lo, hi - 1)
                observer, seen = (a, b) if pair_rng.chance(0.5) else (b, a)
                sightings_by_device.setdefault(observer.device_id, []).append(
                    {"t": t, "seen": seen.device_id,
                     "rssi": -40 - pair_rng.randint(0, 30)}
                )
    for device in sorted(sightings_by_device):
        sightings = sorted(sightings_by_device[device],
                           key=lambda s: (s["t"], s["seen"]))
        batches.append({
            "endpoint": "/api/v1/ingest/proximity",
            "body": {"device": device, "sightings": sightings},
            "t0": sightings[0]["t"],
        })

    day_start = instances[0].start
    day_end = instances[-1].end
    for profile in profiles:
        report_rng = stream(config.seed, "report", day.isoformat(), profile.child_id)
        t = report_rng.randint(day_start, day_end - 1)
        emotion = EMOTION_IDS[report_rng.randint(0, len(EMOTION_IDS) - 1)]
        batches.append({
            "endpoint": "/api/v1/selfreport",
            "body": {"child": profile.child_id, "t": t, "emotion_id": emotion},
            "t0": t,
        })

    batches.sort(key=_batch_order)
    return batches


def _batch_order(batch: dict) -> tuple:
    body = batch["body"]
    who = body.get("device") or body.get("child") or ""
    return (batch["t0"], batch["endpoint"], who)
