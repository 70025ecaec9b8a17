"""Portable deterministic randomness for the simulator.

The generator is splitmix64 (Steele, Lea & Flood's 64-bit mixing
generator): state advances by the golden-gamma constant and each output
is the finalizer mix of the new state. Everything is integer arithmetic
masked to 64 bits, so identical seeds give identical streams on any
platform or runtime.

Independent streams are derived by hashing a string label (FNV-1a 64)
into the seed, which lets every (purpose, child, date, ...) tuple get its
own reproducible generator regardless of evaluation order.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit value."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


class SplitMix64:
    """splitmix64 stream with the float / integer draws the simulator needs."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] (modulo draw; bias is negligible for
        the small ranges used here and keeps the stream portable)."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.next_u64() % (hi - lo + 1)

    def exponential(self, mean: float) -> float:
        """Exponential draw with the given mean (inverse CDF); 0 when mean is 0."""
        if mean <= 0.0:
            return 0.0
        return -mean * math.log1p(-self.random())

    def chance(self, p: float) -> bool:
        return self.random() < p


def stream(seed: int, *key_parts: object) -> SplitMix64:
    """A generator bound to (seed, key): same inputs, same stream, always."""
    label = "/".join(str(part) for part in key_parts)
    return SplitMix64(mix64((seed & MASK64) ^ fnv1a64(label.encode("utf-8"))))
