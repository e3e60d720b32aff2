import time

import pytest

from helpers import small_source, upload_capture, upload_raw
from wildtrap.errors import BackendUnavailableError, ValidationError
from wildtrap.ingest import BlobStore
from wildtrap.pipeline import (
    PipelineRunner,
    PriorityWorkQueue,
    SyntheticBackend,
    WorkItem,
    default_profile,
)
from wildtrap.store import EventStore


@pytest.fixture
def blobs(tmp_path):
    return BlobStore(tmp_path / "blobs")


@pytest.fixture
def events(tmp_path):
    s = EventStore(tmp_path / "events")
    yield s
    s.close()


def seeded_assets(blobs, n=6, seed=1):
    source = small_source(seed=seed)
    return [upload_capture(blobs, source.capture(f"cam-{i % 3:03d}", i),
                           camera_id=f"cam-{i % 3:03d}", seq=i) for i in range(n)]


def make_runner(blobs, events, backend=None, **kwargs):
    backend = backend or SyntheticBackend(store=blobs, jitter_px=0.0, seed=1)
    params = dict(concurrency=3, retry_limit=3, min_confidence=0.0)
    params.update(kwargs)
    return PipelineRunner(blobs, events, backend, default_profile(), **params)


class TestQueue:
    def test_realtime_dequeued_before_waiting_batch(self):
        queue = PriorityWorkQueue()
        for _ in range(10):
            queue.push(WorkItem(asset=None, priority="batch"))
        queue.push(WorkItem(asset=None, priority="realtime"))
        first = queue.pop()
        assert first.priority == "realtime"

    def test_fifo_within_class(self):
        queue = PriorityWorkQueue()
        items = [queue.push(WorkItem(asset=None, priority="batch")) for _ in range(5)]
        popped = [queue.pop() for _ in range(5)]
        assert [p.enqueue_seq for p in popped] == [i.enqueue_seq for i in items]

    def test_pop_returns_none_when_closed_and_empty(self):
        queue = PriorityWorkQueue()
        queue.push(WorkItem(asset=None))
        queue.close()
        assert queue.pop() is not None
        assert queue.pop() is None

    def test_pop_timeout(self):
        queue = PriorityWorkQueue()
        t0 = time.monotonic()
        assert queue.pop(timeout=0.05) is None
        assert time.monotonic() - t0 >= 0.05

    def test_bad_priority_rejected(self):
        with pytest.raises(ValidationError):
            WorkItem(asset=None, priority="urgent")


class TestRunner:
    def test_every_asset_reaches_exactly_one_terminal_outcome(self, blobs, events):
        assets = seeded_assets(blobs, n=8)
        bad = upload_raw(blobs, b"not an image at all", seq=99)
        result = make_runner(blobs, events).run(assets + [bad])
        assert sorted(result.processed) == sorted(a.sha256 for a in assets)
        assert result.dead_lettered == [bad.sha256]
        assert len(result.processed) + len(result.dead_lettered) == len(assets) + 1
        assert events.platform_stats()["images_processed"] == len(assets) + 1

    def test_events_carry_capture_time_and_mode(self, blobs, events):
        source = small_source(seed=2)
        asset = upload_capture(blobs, source.capture("cam-000", 0),
                               captured_at="2025-02-03T04:05:06Z")
        runner = make_runner(blobs, events)
        runner.run([asset], priorities={"cam-000": "realtime"})
        stored = events.events()
        assert stored
        for ev in stored:
            assert ev.pipeline_mode == "realtime"
            assert ev.detected_at.isoformat().startswith("2025-02-03T04:05:06")

    def test_duplicate_work_items_produce_one_event_set(self, blobs, events):
        [asset] = seeded_assets(blobs, n=1)
        runner = make_runner(blobs, events)
        runner.start()
        runner.submit_asset(asset)
        runner.submit_asset(asset)  # ingest dedupe race: same asset twice
        runner.drain()
        runner.stop()
        assert runner.result.events_duplicate >= 1
        ids = [ev.event_id for ev in events.events()]
        assert len(ids) == len(set(ids))
        assert events.platform_stats()["images_processed"] == 1

    def test_flaky_backend_retried_then_succeeds(self, blobs, events):
        [asset] = seeded_assets(blobs, n=1)

        inner = SyntheticBackend(store=blobs, jitter_px=0.0, seed=1)
        failures = {"left": 2}

        class Flaky:
            model_id = inner.model_id

            def detect(self, request):
                if failures["left"] > 0:
                    failures["left"] -= 1
                    raise BackendUnavailableError("transient outage")
                return inner.detect(request)

        result = make_runner(blobs, events, backend=Flaky(), concurrency=1).run([asset])
        assert result.retries == 2
        assert result.processed == [asset.sha256]
        assert result.dead_lettered == []
        assert len(events) > 0

    def test_retry_exhaustion_dead_letters(self, blobs, events):
        [asset] = seeded_assets(blobs, n=1)

        class Down:
            model_id = "down"

            def detect(self, request):
                raise BackendUnavailableError("still down")

        result = make_runner(blobs, events, backend=Down(), retry_limit=2,
                             concurrency=1).run([asset])
        assert result.processed == []
        assert result.dead_lettered == [asset.sha256]
        record = events.dead_letters()[0]
        assert record["attempts"] == 3
        assert "backend_unavailable" in record["reason"]

    def test_two_runs_produce_identical_event_sets(self, blobs, tmp_path):
        assets = seeded_assets(blobs, n=6, seed=5)
        snapshots = []
        for run in ("a", "b"):
            events = EventStore(tmp_path / f"events-{run}")
            backend = SyntheticBackend(store=blobs, jitter_px=3.0, seed=11)
            make_runner(blobs, events, backend=backend).run(assets)
            snapshots.append({ev.event_id: ev for ev in events.events()})
            events.close()
        assert snapshots[0] == snapshots[1]

    def test_priority_trace_contract(self, blobs, events):
        # slow backend so batch items are still queued when realtime arrives
        source = small_source(seed=7)
        batch_assets = [upload_capture(blobs, source.capture("cam-001", i),
                                       camera_id="cam-001", seq=i) for i in range(12)]
        realtime_assets = [upload_capture(blobs, source.capture("cam-000", 100 + i),
                                          camera_id="cam-000", seq=100 + i) for i in range(3)]
        backend = SyntheticBackend(store=blobs, jitter_px=0.0, seed=1, latency_ms=20.0)
        runner = make_runner(blobs, events, backend=backend, concurrency=2)
        runner.start()
        for asset in batch_assets:
            runner.submit_asset(asset, "batch")
        time.sleep(0.05)
        realtime_items = [runner.submit_asset(a, "realtime") for a in realtime_assets]
        runner.drain()
        runner.stop()

        trace = {t.sha256: t for t in runner.result.trace}
        for item in realtime_items:
            rt = trace[item.asset.sha256]
            for batch_asset in batch_assets:
                bt = trace[batch_asset.sha256]
                if bt.start_seq > rt.enqueue_seq:  # had not started at injection
                    assert bt.start_seq > rt.start_seq
