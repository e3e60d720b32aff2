"""Burst aggregation: events collapse into species observations per camera.

Consecutive same-(camera, label) events closer together than the
independence window belong to one observation; a gap of at least the
window starts a new one. Grouping uses capture time, not processing time.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from ..errors import ValidationError
from ..timeutil import format_utc


@dataclass(frozen=True)
class Observation:
    label: str
    camera_id: str
    window_start: datetime
    window_end: datetime
    event_count: int
    max_confidence: float

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "camera_id": self.camera_id,
            "window_start": format_utc(self.window_start),
            "window_end": format_utc(self.window_end),
            "event_count": self.event_count,
            "max_confidence": self.max_confidence,
        }


def aggregate_observations(events, independence_window_minutes: float) -> list[Observation]:
    if independence_window_minutes <= 0:
        raise ValidationError("independence window must be > 0 minutes")
    window_s = independence_window_minutes * 60.0
    groups: dict[tuple[str, str], list] = {}
    for event in events:
        groups.setdefault((event.camera_id, event.label), []).append(event)

    observations = []
    for (camera_id, label) in sorted(groups):
        run: list = []
        ordered = sorted(groups[(camera_id, label)],
                         key=lambda ev: (ev.detected_at, ev.event_id))
        for event in ordered:
            if run and (event.detected_at - run[-1].detected_at).total_seconds() >= window_s:
                observations.append(_close_run(camera_id, label, run))
                run = []
            run.append(event)
        if run:
            observations.append(_close_run(camera_id, label, run))
    return observations


def _close_run(camera_id: str, label: str, run) -> Observation:
    return Observation(
        label=label,
        camera_id=camera_id,
        window_start=run[0].detected_at,
        window_end=run[-1].detected_at,
        event_count=len(run),
        max_confidence=max(ev.confidence for ev in run),
    )
