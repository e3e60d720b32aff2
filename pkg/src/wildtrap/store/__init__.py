"""Append-only detection event persistence, queries, burst aggregation, stats."""

from .events import AppendResult, DetectionEvent, EventStore, derive_event_id
from .observations import Observation, aggregate_observations

__all__ = [
    "AppendResult",
    "DetectionEvent",
    "EventStore",
    "Observation",
    "aggregate_observations",
    "derive_event_id",
]
