"""Device-side feature extraction.

Raw accelerometer samples and one-second audio frames are reduced to a
single per-second scalar on the device. Only those scalars (and Bluetooth
sightings) ever leave the device: no raw audio is retained beyond the
returned RMS value, and no precise position is collected at all.

Motion is summarized as the deviation of the acceleration magnitude from
1 g, the standard actigraphy-style count for an overall activity level.
Audio is summarized as the frame RMS of amplitudes normalized to [-1, 1],
so the scalar is always in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidFrame, InvalidSample

KIND_MOTION = "motion"
KIND_AUDIO = "audio"
FEATURE_KINDS = (KIND_MOTION, KIND_AUDIO)

# Sensor range guard: consumer accelerometers top out well below this.
MAX_ACCEL_G = 16.0

DEFAULT_SAMPLE_RATE = 8000


@dataclass(frozen=True)
class AccelSample:
    """One accelerometer reading in g units at an integer Unix second."""

    t: int
    ax: float
    ay: float
    az: float


@dataclass(frozen=True)
class AudioFrame:
    """Exactly one second of mono audio, amplitudes normalized to [-1, 1].

    The frame length equals the sample rate (default 8000 Hz).
    """

    t: int
    samples: np.ndarray

    @property
    def sample_rate(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class SecondFeature:
    """One per-second scalar feature; the only sensing data transmitted."""

    device: str
    t: int
    kind: str
    value: float

    def __post_init__(self) -> None:
        if self.kind not in FEATURE_KINDS:
            raise InvalidSample(f"unknown feature kind {self.kind!r}")
        if not math.isfinite(self.value) or self.value < 0:
            raise InvalidSample(f"feature value must be finite and >= 0, got {self.value!r}")
        if self.kind == KIND_AUDIO and self.value > 1.0:
            raise InvalidSample(f"audio RMS must be <= 1, got {self.value!r}")


def motion_count(sample: AccelSample) -> float:
    """Per-second motion count: |magnitude(ax, ay, az) - 1 g|.

    A device at rest measures exactly gravity, so the count is zero;
    any acceleration on top of (or against) gravity raises it. Depends
    only on the magnitude, so it is invariant under device orientation.

    Raises:
        InvalidSample: on non-finite or out-of-range components.
    """
    components = (sample.ax, sample.ay, sample.az)
    for c in components:
        if not math.isfinite(c):
            raise InvalidSample(f"non-finite acceleration component {c!r}")
        if abs(c) > MAX_ACCEL_G:
            raise InvalidSample(f"acceleration component {c!r} exceeds {MAX_ACCEL_G} g")
    magnitude = math.sqrt(sample.ax ** 2 + sample.ay ** 2 + sample.az ** 2)
    return abs(magnitude - 1.0)


def audio_rms(frame: AudioFrame) -> float:
    """Frame RMS: sqrt(mean of squared amplitudes), in [0, 1].

    The raw frame is reduced to this single scalar and discarded by the
    caller; nothing in this module stores or forwards frame content.

    Raises:
        InvalidFrame: on an empty frame or amplitudes outside [-1, 1].
    """
    samples = np.asarray(frame.samples, dtype=np.float64)
    if samples.size == 0:
        raise InvalidFrame("empty audio frame")
    if not np.all(np.isfinite(samples)):
        raise InvalidFrame("non-finite amplitude in audio frame")
    peak = float(np.max(np.abs(samples)))
    if peak > 1.0:
        raise InvalidFrame(f"amplitude {peak!r} outside [-1, 1]")
    return float(np.sqrt(np.mean(samples * samples)))


def bucket_seconds(
    device: str,
    inputs: Iterable[tuple[float, float]],
    kind: str,
) -> list[SecondFeature]:
    """Group raw (t, value) pairs into at most one feature per integer second.

    Multiple values within one second are reduced by arithmetic mean;
    seconds with no input produce no feature (gaps are never interpolated).
    Output is strictly increasing in t.
    """
    groups: dict[int, list[float]] = {}
    for t, value in inputs:
        groups.setdefault(int(math.floor(t)), []).append(value)
    return [
        SecondFeature(device=device, t=second, kind=kind, value=math.fsum(vs) / len(vs))
        for second, vs in sorted(groups.items())
    ]


def sine_frame(t: int, amplitude: float, cycles: int, phase: float,
               sample_rate: int = DEFAULT_SAMPLE_RATE) -> AudioFrame:
    """Build a one-second sine frame with an integer number of cycles.

    With integer cycles (and 2*cycles not a multiple of the sample rate)
    the RMS is exactly amplitude / sqrt(2), which makes these frames
    convenient oracles for :func:`audio_rms`.
    """
    n = np.arange(sample_rate, dtype=np.float64)
    samples = amplitude * np.sin(2.0 * math.pi * cycles * n / sample_rate + phase)
    return AudioFrame(t=t, samples=samples)


def silent_frame(t: int, sample_rate: int = DEFAULT_SAMPLE_RATE) -> AudioFrame:
    return AudioFrame(t=t, samples=np.zeros(sample_rate, dtype=np.float64))


def features_to_wire(features: Sequence[SecondFeature]) -> list[dict]:
    """Serialize features to the ingestion wire shape (device field elided)."""
    return [{"t": f.t, "kind": f.kind, "value": f.value} for f in features]
