"""senseme: school awareness platform.

Child devices reduce raw motion and audio to per-second scalars; a
central event-sourced service turns those (plus Bluetooth co-presence)
into schedule-windowed activity cues with one-week baselines, obfuscated
location labels, teacher annotations, and a two-directional
teacher/parent message thread.
"""

from . import aggregation, eventlog, events, features, proximity, schedule
from .errors import SensemeError
from .service import AwarenessService

__version__ = "0.1.0"

__all__ = [
    "AwarenessService",
    "SensemeError",
    "aggregation",
    "eventlog",
    "events",
    "features",
    "proximity",
    "schedule",
    "__version__",
]
