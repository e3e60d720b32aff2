"""Multi-producer/multi-consumer work queue with a strict two-class
priority: a realtime item is always dequeued before any waiting batch item.
Monotonic enqueue/start sequence numbers let tests assert ordering without
wall clocks."""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass

from ..errors import ValidationError
from ..ingest.blobstore import ImageAsset

PRIORITIES = ("realtime", "batch")


@dataclass
class WorkItem:
    asset: ImageAsset | None
    priority: str = "batch"
    enqueued_at: float = 0.0
    enqueue_seq: int = -1
    start_seq: int = -1

    def __post_init__(self):
        if self.priority not in PRIORITIES:
            raise ValidationError(f"priority must be one of {PRIORITIES}")


class PriorityWorkQueue:
    def __init__(self):
        self._cond = threading.Condition()
        self._realtime: deque[WorkItem] = deque()
        self._batch: deque[WorkItem] = deque()
        self._seq = 0
        self._closed = False

    def push(self, item: WorkItem) -> WorkItem:
        with self._cond:
            if self._closed:
                raise ValidationError("queue is closed")
            item.enqueue_seq = self._seq
            self._seq += 1
            item.enqueued_at = time.time()
            (self._realtime if item.priority == "realtime" else self._batch).append(item)
            self._cond.notify()
        return item

    def pop(self, timeout: float | None = None) -> WorkItem | None:
        """Next item, realtime before batch; None once closed and drained."""
        deadline = None if timeout is None else time.monotonic() + timeout
        with self._cond:
            while True:
                if self._realtime:
                    item = self._realtime.popleft()
                elif self._batch:
                    item = self._batch.popleft()
                elif self._closed:
                    return None
                else:
                    remaining = None if deadline is None else deadline - time.monotonic()
                    if remaining is not None and remaining <= 0:
                        return None
                    self._cond.wait(remaining)
                    continue
                item.start_seq = self._seq
                self._seq += 1
                return item

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def __len__(self) -> int:
        with self._cond:
            return len(self._realtime) + len(self._batch)
