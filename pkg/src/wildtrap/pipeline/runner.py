"""The pipeline runner: pulls work items off the priority queue, runs
preprocess + infer with bounded retries, appends detection events
idempotently, and dead-letters anything that cannot reach a good outcome.
Every finalized asset ends in exactly one terminal state: events appended
or a dead-letter record."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field

from ..errors import (
    BackendUnavailableError,
    ConfigurationError,
    DecodeError,
    ProtocolViolationError,
    ValidationError,
)
from ..ingest.blobstore import BlobStore, ImageAsset
from ..store.events import DetectionEvent, EventStore, derive_event_id
from ..timeutil import parse_utc
from .backends import infer
from .preprocess import ModelProfile, preprocess
from .queue import PriorityWorkQueue, WorkItem

logger = logging.getLogger(__name__)


@dataclass
class TraceEntry:
    sha256: str
    priority: str
    enqueue_seq: int
    start_seq: int


@dataclass
class PipelineResult:
    processed: list[str] = field(default_factory=list)
    dead_lettered: list[str] = field(default_factory=list)
    events_created: int = 0
    events_duplicate: int = 0
    retries: int = 0
    trace: list[TraceEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "processed": len(self.processed),
            "dead_lettered": len(self.dead_lettered),
            "events_created": self.events_created,
            "events_duplicate": self.events_duplicate,
            "retries": self.retries,
        }


class PipelineRunner:
    """Runs up to ``concurrency`` in-flight backend calls over a shared queue.

    Event appends are idempotent (content-derived ids), so duplicate work
    items from an ingest dedupe race are harmless. ``on_event`` fires only
    for events that were actually new.
    """

    def __init__(self, blobs: BlobStore, events: EventStore, backend,
                 profile: ModelProfile, concurrency: int = 4, retry_limit: int = 3,
                 min_confidence: float | None = None, retry_backoff_s: float = 0.0,
                 on_event=None):
        if concurrency < 1:
            raise ValidationError("concurrency must be >= 1")
        self.blobs = blobs
        self.events = events
        self.backend = backend
        self.profile = profile
        self.concurrency = concurrency
        self.retry_limit = retry_limit
        self.min_confidence = (profile.default_min_confidence
                               if min_confidence is None else min_confidence)
        self.retry_backoff_s = retry_backoff_s
        self.on_event = on_event
        self.queue = PriorityWorkQueue()
        self.result = PipelineResult()
        self._result_lock = threading.Lock()
        self._inflight = 0
        self._idle = threading.Condition()
        self._threads: list[threading.Thread] = []

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        for i in range(self.concurrency):
            t = threading.Thread(target=self._worker, name=f"pipeline-{i}", daemon=True)
            t.start()
            self._threads.append(t)

    def submit(self, item: WorkItem) -> WorkItem:
        with self._idle:
            self._inflight += 1
        try:
            return self.queue.push(item)
        except ValidationError:
            with self._idle:
                self._inflight -= 1
                self._idle.notify_all()
            raise

    def submit_asset(self, asset: ImageAsset, priority: str = "batch") -> WorkItem:
        return self.submit(WorkItem(asset=asset, priority=priority))

    def drain(self, timeout: float | None = None) -> None:
        """Block until every submitted item has reached a terminal outcome."""
        deadline = None if timeout is None else time.monotonic() + timeout
        with self._idle:
            while self._inflight > 0:
                remaining = None if deadline is None else deadline - time.monotonic()
                if remaining is not None and remaining <= 0:
                    raise TimeoutError(f"{self._inflight} items still in flight")
                self._idle.wait(remaining)

    def stop(self) -> None:
        self.queue.close()
        for t in self._threads:
            t.join()
        self._threads.clear()

    def run(self, assets, priorities=None) -> PipelineResult:
        """Batch mode: process the given assets to completion and stop."""
        priorities = priorities or {}
        self.start()
        for asset in assets:
            self.submit_asset(asset, priorities.get(asset.manifest.camera_id, "batch"))
        self.drain()
        self.stop()
        return self.result

    # -- workers ---------------------------------------------------------------

    def _worker(self) -> None:
        while True:
            item = self.queue.pop()
            if item is None:
                return
            try:
                self._process(item)
            except Exception:
                logger.exception("unhandled pipeline failure for %s",
                                 item.asset.sha256 if item.asset else "?")
                self._record_dead(item.asset.sha256, "internal_error", 1)
            finally:
                with self._idle:
                    self._inflight -= 1
                    if self._inflight == 0:
                        self._idle.notify_all()

    def _process(self, item: WorkItem) -> None:
        asset = item.asset
        sha = asset.sha256
        with self._result_lock:
            self.result.trace.append(TraceEntry(
                sha256=sha, priority=item.priority,
                enqueue_seq=item.enqueue_seq, start_seq=item.start_seq))
        try:
            data = self.blobs.get_bytes(sha)
            pre = preprocess(data, self.profile, source_sha256=sha)
        except DecodeError as exc:
            self._record_dead(sha, f"decode_error: {exc}", 1)
            return
        except ValidationError as exc:
            self._record_dead(sha, f"missing_blob: {exc}", 1)
            return

        attempts = 0
        while True:
            attempts += 1
            try:
                detections = infer(pre, self.backend, self.profile,
                                   self.min_confidence, image_bytes=data)
                break
            except BackendUnavailableError as exc:
                if attempts > self.retry_limit:
                    self._record_dead(sha, f"backend_unavailable: {exc}", attempts)
                    return
                with self._result_lock:
                    self.result.retries += 1
                if self.retry_backoff_s:
                    time.sleep(self.retry_backoff_s * attempts)
            except (ProtocolViolationError, ConfigurationError) as exc:
                self._record_dead(sha, f"{type(exc).__name__}: {exc}", attempts)
                return

        detected_at = parse_utc(asset.manifest.captured_at)
        created = duplicate = 0
        for index, det in enumerate(detections):
            event = DetectionEvent(
                event_id=derive_event_id(sha, det.model_id, index),
                image_sha256=sha,
                camera_id=asset.manifest.camera_id,
                model_id=det.model_id,
                label=det.label,
                confidence=det.confidence,
                bbox=det.bbox,
                detected_at=detected_at,
                pipeline_mode=item.priority,
            )
            result = self.events.append(event)
            if result.created:
                created += 1
                if self.on_event is not None:
                    self.on_event(event)
            else:
                duplicate += 1
        with self._result_lock:
            self.result.processed.append(sha)
            self.result.events_created += created
            self.result.events_duplicate += duplicate

    def _record_dead(self, sha: str, reason: str, attempts: int) -> None:
        self.events.append_dead_letter(sha, reason, attempts)
        with self._result_lock:
            self.result.dead_lettered.append(sha)
