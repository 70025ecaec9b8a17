#!/usr/bin/env python3
"""Walk through the device-side feature math.

Shows how raw accelerometer samples become per-second motion counts, how
one-second audio frames reduce to an RMS scalar, and why nothing beyond
those scalars ever needs to leave the device.
"""

import math

import numpy as np

from senseme.features import (
    AccelSample,
    AudioFrame,
    audio_rms,
    bucket_seconds,
    motion_count,
    sine_frame,
)


def main() -> None:
    print("== motion counts ==")
    for label, sample in [
        ("device lying flat", AccelSample(0, 0.0, 0.0, 1.0)),
        ("device held sideways", AccelSample(1, 1.0, 0.0, 0.0)),
        ("a light shake", AccelSample(2, 0.3, 0.4, 1.2)),
        ("a hard bump", AccelSample(3, 0.0, 0.0, 2.0)),
    ]:
        print(f"  {label:22s} -> count {motion_count(sample):.3f}")
    print("  (0 at rest in any orientation; counts grow with acceleration)")

    print("\n== audio RMS ==")
    silence = AudioFrame(0, np.zeros(8000))
    talking = sine_frame(0, amplitude=0.5, cycles=440, phase=0.0)
    shouting = sine_frame(0, amplitude=0.9, cycles=300, phase=1.0)
    print(f"  silence      -> {audio_rms(silence):.6f}")
    print(f"  talking      -> {audio_rms(talking):.6f}  (0.5/sqrt(2) = "
          f"{0.5 / math.sqrt(2):.6f})")
    print(f"  loud voice   -> {audio_rms(shouting):.6f}")
    print("  the 8000-sample frame is discarded; only the scalar survives")

    print("\n== second bucketing ==")
    raw = [(100.0, 0.2), (100.4, 0.4), (102.9, 0.1)]
    for feature in bucket_seconds("demo-device", raw, "motion"):
        print(f"  t={feature.t}  value={feature.value:.2f}")
    print("  two readings in second 100 averaged; second 101 stays a gap")


if __name__ == "__main__":
    main()
