"""Delivery channels: anything with ``send(alert) -> bool`` (ack/fail)."""

from __future__ import annotations

import json
import threading
from pathlib import Path


class MemoryChannel:
    """In-memory channel for tests; optionally fails the first N sends."""

    def __init__(self, fail_times: int = 0):
        self.fail_times = fail_times
        self.sent: list[dict] = []
        self._lock = threading.Lock()

    def send(self, alert) -> bool:
        with self._lock:
            if self.fail_times > 0:
                self.fail_times -= 1
                return False
            self.sent.append(alert.to_dict())
            return True


class FileChannel:
    """Appends one JSON line per delivered alert; always acks."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def send(self, alert) -> bool:
        line = json.dumps(alert.to_dict(), sort_keys=True) + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
        return True
