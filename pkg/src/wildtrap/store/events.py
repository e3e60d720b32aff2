"""Append-only detection event log: JSON Lines segments plus an in-memory index.

One JSON object per line; segments roll at a byte threshold and are named
``events-<start_offset>.jsonl``. The index is rebuilt by replaying the
segments at startup, so a crashed writer loses at most a torn trailing
line. Appends are idempotent on ``event_id`` and serialized through one
writer lock; readers see consistent snapshots.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from ..errors import ValidationError
from ..geometry import Box
from ..timeutil import format_utc, now_utc, parse_utc
from .observations import Observation, aggregate_observations

SEGMENT_BYTES = 64 * 1024 * 1024
PIPELINE_MODES = ("realtime", "batch")
DEAD_LETTER_FILE = "dead_letter.jsonl"


def derive_event_id(image_sha256: str, model_id: str, detection_index: int) -> str:
    """Content-derived id so re-deliveries append the exact same event."""
    key = f"{image_sha256}:{model_id}:{detection_index}".encode()
    return hashlib.sha256(key).hexdigest()[:32]


@dataclass(frozen=True)
class DetectionEvent:
    event_id: str
    image_sha256: str
    camera_id: str
    model_id: str
    label: str
    confidence: float
    bbox: Box
    detected_at: datetime
    pipeline_mode: str

    def validate(self) -> None:
        for name in ("event_id", "image_sha256", "camera_id", "model_id", "label"):
            if not getattr(self, name):
                raise ValidationError(f"{name} must be non-empty")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")
        if self.pipeline_mode not in PIPELINE_MODES:
            raise ValidationError(f"pipeline_mode must be one of {PIPELINE_MODES}")
        if self.detected_at.tzinfo is None:
            raise ValidationError("detected_at must be timezone-aware UTC")

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "image_sha256": self.image_sha256,
            "camera_id": self.camera_id,
            "model_id": self.model_id,
            "label": self.label,
            "confidence": self.confidence,
            "bbox": self.bbox.as_list(),
            "detected_at": format_utc(self.detected_at),
            "pipeline_mode": self.pipeline_mode,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DetectionEvent":
        try:
            event = cls(
                event_id=data["event_id"],
                image_sha256=data["image_sha256"],
                camera_id=data["camera_id"],
                model_id=data["model_id"],
                label=data["label"],
                confidence=float(data["confidence"]),
                bbox=Box.from_list(data["bbox"]),
                detected_at=parse_utc(data["detected_at"]),
                pipeline_mode=data["pipeline_mode"],
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed event record: {exc}") from exc
        event.validate()
        return event


@dataclass(frozen=True)
class AppendResult:
    offset: int
    created: bool


class EventStore:
    def __init__(self, root: str | Path, segment_bytes: int = SEGMENT_BYTES):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.segment_bytes = segment_bytes
        self._lock = threading.Lock()
        self._events: list[DetectionEvent] = []
        self._by_id: dict[str, int] = {}
        self._event_shas: set[str] = set()
        self._dead: list[dict] = []
        self._dead_shas: set[str] = set()
        self._replay()
        self._segment_path = self._current_segment_path()
        self._segment_size = (self._segment_path.stat().st_size
                              if self._segment_path.exists() else 0)
        self._fh = open(self._segment_path, "a", encoding="utf-8")
        self._dead_fh = open(self.root / DEAD_LETTER_FILE, "a", encoding="utf-8")

    # -- replay ------------------------------------------------------------

    def _segments(self) -> list[Path]:
        return sorted(self.root.glob("events-*.jsonl"),
                      key=lambda p: int(p.stem.split("-")[1]))

    def _current_segment_path(self) -> Path:
        segments = self._segments()
        if segments:
            return segments[-1]
        return self.root / f"events-{0:010d}.jsonl"

    def _replay(self) -> None:
        for segment in self._segments():
            for record in _complete_json_lines(segment):
                event = DetectionEvent.from_dict(record)
                if event.event_id not in self._by_id:
                    self._by_id[event.event_id] = len(self._events)
                    self._events.append(event)
                    self._event_shas.add(event.image_sha256)
        dead_path = self.root / DEAD_LETTER_FILE
        if dead_path.exists():
            for record in _complete_json_lines(dead_path):
                self._dead.append(record)
                self._dead_shas.add(record["sha256"])

    # -- writes ------------------------------------------------------------

    def append(self, event: DetectionEvent) -> AppendResult:
        event.validate()
        with self._lock:
            existing = self._by_id.get(event.event_id)
            if existing is not None:
                return AppendResult(offset=existing, created=False)
            line = json.dumps(event.to_dict(), sort_keys=True) + "\n"
            encoded = len(line.encode("utf-8"))
            if self._segment_size and self._segment_size + encoded > self.segment_bytes:
                self._roll_segment()
            self._fh.write(line)
            self._fh.flush()
            self._segment_size += encoded
            offset = len(self._events)
            self._events.append(event)
            self._by_id[event.event_id] = offset
            self._event_shas.add(event.image_sha256)
            return AppendResult(offset=offset, created=True)

    def append_event(self, event: DetectionEvent) -> int:
        """Spec surface: offset of the (possibly pre-existing) event."""
        return self.append(event).offset

    def _roll_segment(self) -> None:
        self._fh.close()
        self._segment_path = self.root / f"events-{len(self._events):010d}.jsonl"
        self._fh = open(self._segment_path, "a", encoding="utf-8")
        self._segment_size = 0

    def append_dead_letter(self, sha256: str, reason: str, attempts: int) -> dict:
        record = {"sha256": sha256, "reason": reason, "attempts": attempts,
                  "ts": format_utc(now_utc())}
        with self._lock:
            self._dead_fh.write(json.dumps(record, sort_keys=True) + "\n")
            self._dead_fh.flush()
            self._dead.append(record)
            self._dead_shas.add(sha256)
        return record

    # -- reads -------------------------------------------------------------

    def events(self) -> list[DetectionEvent]:
        with self._lock:
            return list(self._events)

    def dead_letters(self) -> list[dict]:
        with self._lock:
            return list(self._dead)

    def __len__(self) -> int:
        with self._lock:
            return len(self._events)

    def has_terminal_outcome(self, sha256: str) -> bool:
        with self._lock:
            return sha256 in self._dead_shas or sha256 in self._event_shas

    def get_event(self, event_id: str) -> DetectionEvent | None:
        with self._lock:
            offset = self._by_id.get(event_id)
            return self._events[offset] if offset is not None else None

    def query_events(self, camera_id: str | None = None, label: str | None = None,
                     time_range: tuple[datetime | None, datetime | None] | None = None,
                     min_confidence: float | None = None) -> list[DetectionEvent]:
        if time_range is not None:
            lo, hi = time_range
            if lo is not None and hi is not None and lo > hi:
                raise ValidationError(f"inverted time range: {lo} > {hi}")
        out = []
        for event in self.events():
            if camera_id is not None and event.camera_id != camera_id:
                continue
            if label is not None and event.label != label:
                continue
            if time_range is not None:
                lo, hi = time_range
                if lo is not None and event.detected_at < lo:
                    continue
                if hi is not None and event.detected_at > hi:
                    continue
            if min_confidence is not None and event.confidence < min_confidence:
                continue
            out.append(event)
        out.sort(key=lambda ev: (ev.detected_at, ev.event_id))
        return out

    def observations(self, independence_window_minutes: float = 30.0) -> list[Observation]:
        return aggregate_observations(self.events(), independence_window_minutes)

    def platform_stats(self, independence_window_minutes: float = 30.0) -> dict:
        with self._lock:
            events = list(self._events)
            dead_shas = set(self._dead_shas)
            event_shas = set(self._event_shas)
        return {
            "images_processed": len(event_shas | dead_shas),
            "detection_events": len(events),
            "observations": len(aggregate_observations(events, independence_window_minutes)),
            "distinct_labels": len({ev.label for ev in events}),
        }

    def close(self) -> None:
        with self._lock:
            self._fh.close()
            self._dead_fh.close()


def _complete_json_lines(path: Path):
    """Parsed records from fully-written lines; a torn trailing line is skipped."""
    raw = path.read_bytes()
    if not raw:
        return
    lines = raw.split(b"\n")
    tail = lines.pop()  # text after the last newline; non-empty means torn write
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}:{lineno}: corrupt record: {exc}") from exc
    _ = tail
