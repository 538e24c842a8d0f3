"""Context providers: fact store, simulated clock, info point, snapshots."""

from .clock import SimClock, parse_duration
from .facts import FactStore, update_facts
from .hub import ContextHub
from .infopoint import HttpInfoPoint, InfoPoint, format_hhmm, parse_hhmm

__all__ = [
    "ContextHub",
    "FactStore",
    "HttpInfoPoint",
    "InfoPoint",
    "SimClock",
    "format_hhmm",
    "parse_duration",
    "parse_hhmm",
    "update_facts",
]
