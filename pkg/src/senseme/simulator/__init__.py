"""Deterministic school simulator: synthesizes raw device signals, reduces
them through the real feature-extraction code, and drives the service's
ingestion API (or writes the batches to dry-run files)."""

from .profiles import AnomalySpec, ChildProfile, SimConfig, parse_anomaly_spec, parse_profiles
from .rng import SplitMix64, stream
from .runner import SimReport, run
from .synth import generate_day, inject_anomaly, synthesize_second

__all__ = [
    "AnomalySpec",
    "ChildProfile",
    "SimConfig",
    "SimReport",
    "SplitMix64",
    "generate_day",
    "inject_anomaly",
    "parse_anomaly_spec",
    "parse_profiles",
    "run",
    "stream",
    "synthesize_second",
]
