"""Throughput bench over the real queue/worker machinery with a
fixed-latency stand-in backend, reporting rate, latency percentiles and
the scheduling overhead against the concurrency * (1000/latency) ceiling."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

from ..errors import ValidationError
from .queue import PriorityWorkQueue, WorkItem


@dataclass(frozen=True)
class ThroughputReport:
    images_per_s: float
    p50_ms: float
    p99_ms: float
    overhead_fraction: float
    theoretical_images_per_s: float
    image_count: int
    concurrency: int
    backend_latency_ms: float
    wall_s: float

    def to_dict(self) -> dict:
        return {
            "images_per_s": self.images_per_s,
            "p50_ms": self.p50_ms,
            "p99_ms": self.p99_ms,
            "overhead_fraction": self.overhead_fraction,
            "theoretical_images_per_s": self.theoretical_images_per_s,
            "image_count": self.image_count,
            "concurrency": self.concurrency,
            "backend_latency_ms": self.backend_latency_ms,
            "wall_s": self.wall_s,
        }


def _percentile(sorted_values, fraction: float) -> float:
    if not sorted_values:
        return 0.0
    index = min(int(fraction * len(sorted_values)), len(sorted_values) - 1)
    return sorted_values[index]


def bench_throughput(backend_latency_ms: float, concurrency: int,
                     image_count: int) -> ThroughputReport:
    if backend_latency_ms <= 0 or concurrency < 1 or image_count < 1:
        raise ValidationError("latency, concurrency and image count must be positive")
    queue = PriorityWorkQueue()
    for _ in range(image_count):
        queue.push(WorkItem(asset=None, priority="batch"))
    queue.close()

    latency_s = backend_latency_ms / 1000.0
    per_worker: list[list[float]] = [[] for _ in range(concurrency)]

    def worker(slot: int) -> None:
        durations = per_worker[slot]
        while queue.pop() is not None:
            t0 = time.perf_counter()
            time.sleep(latency_s)
            durations.append(time.perf_counter() - t0)

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(concurrency)]
    start = time.perf_counter()
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    wall = time.perf_counter() - start

    durations = sorted(d for worker_durations in per_worker for d in worker_durations)
    measured = image_count / wall
    theoretical = concurrency * 1000.0 / backend_latency_ms
    return ThroughputReport(
        images_per_s=measured,
        p50_ms=_percentile(durations, 0.50) * 1000.0,
        p99_ms=_percentile(durations, 0.99) * 1000.0,
        overhead_fraction=1.0 - measured / theoretical,
        theoretical_images_per_s=theoretical,
        image_count=image_count,
        concurrency=concurrency,
        backend_latency_ms=backend_latency_ms,
        wall_s=wall,
    )
