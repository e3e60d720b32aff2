"""Store-and-forward fleet simulation over a lossy wide-area link.

A station offers each captured frame to the server until it sees an
acknowledged finalize or runs out of retries. A transfer attempt is
dropped (mid-flight, leaving a resumable prefix on the server) with
probability ``drop_rate``; the finalize acknowledgment can be lost with
the same probability, in which case the next attempt is answered
``AlreadyStored`` and the duplicate delivery is absorbed by dedupe.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from datetime import timedelta

from ..errors import ValidationError
from ..timeutil import format_utc, parse_utc
from .blobstore import AlreadyStored, BlobStore
from .cameras import CameraSource
from .manifest import UploadManifest
from .synth import SyntheticImageSource

DEFAULT_START = "2025-01-01T00:00:00Z"


@dataclass(frozen=True)
class LinkModel:
    drop_rate: float
    latency_ms: float = 40.0
    bandwidth_bytes_per_s: float = 1_000_000.0
    max_retries: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.drop_rate <= 1.0:
            raise ValidationError(f"drop_rate {self.drop_rate} outside [0, 1]")
        if self.bandwidth_bytes_per_s <= 0:
            raise ValidationError("bandwidth_bytes_per_s must be positive")
        if self.latency_ms < 0:
            raise ValidationError("latency_ms must be >= 0")
        if self.max_retries < 0:
            raise ValidationError("max_retries must be >= 0")


@dataclass(frozen=True)
class DeliveryOutcome:
    sha256: str
    camera_id: str
    sequence_no: int
    delivered: bool
    transmissions: int
    duplicate_deliveries: int
    latency_ms: float

    @property
    def retransmissions(self) -> int:
        return max(self.transmissions - 1, 0)

    def to_dict(self) -> dict:
        return {
            "sha256": self.sha256,
            "camera_id": self.camera_id,
            "sequence_no": self.sequence_no,
            "delivered": self.delivered,
            "transmissions": self.transmissions,
            "retransmissions": self.retransmissions,
            "duplicate_deliveries": self.duplicate_deliveries,
            "latency_ms": self.latency_ms,
        }


@dataclass
class DeliveryReport:
    outcomes: list[DeliveryOutcome]
    cameras: list[CameraSource] = field(default_factory=list)

    @property
    def delivered_count(self) -> int:
        return sum(1 for o in self.outcomes if o.delivered)

    @property
    def undelivered_count(self) -> int:
        return sum(1 for o in self.outcomes if not o.delivered)

    @property
    def total_transmissions(self) -> int:
        return sum(o.transmissions for o in self.outcomes)

    @property
    def total_duplicates(self) -> int:
        return sum(o.duplicate_deliveries for o in self.outcomes)

    @property
    def mean_transmissions(self) -> float:
        return self.total_transmissions / len(self.outcomes) if self.outcomes else 0.0

    def to_dict(self) -> dict:
        return {
            "images": len(self.outcomes),
            "delivered": self.delivered_count,
            "undelivered": self.undelivered_count,
            "mean_transmissions": self.mean_transmissions,
            "duplicate_deliveries": self.total_duplicates,
            "outcomes": [o.to_dict() for o in self.outcomes],
        }


def default_cameras(count: int, region: str = "sub-saharan-africa") -> list[CameraSource]:
    cameras = []
    for i in range(count):
        cameras.append(CameraSource(
            camera_id=f"cam-{i:03d}",
            site_name=f"site-{i // 4}",
            region=region,
            realtime=(i % 4 == 0),
            zone_id=f"zone-{i % 3}",
            modality="thermal" if i % 5 == 2 else "visual",
        ))
    return cameras


def simulate_fleet(store: BlobStore, cameras: int | list[CameraSource],
                   images_per_camera: int, link: LinkModel, *,
                   source: SyntheticImageSource | None = None,
                   plant_truth_sidecars: bool = True,
                   chunk_size: int = 64 * 1024,
                   start_time: str = DEFAULT_START,
                   capture_interval_s: float = 90.0) -> DeliveryReport:
    """Deliver every camera's frames through the lossy link into the store."""
    if isinstance(cameras, int):
        if cameras <= 0:
            raise ValidationError("cameras must be positive")
        cameras = default_cameras(cameras)
    if images_per_camera <= 0:
        raise ValidationError("images_per_camera must be positive")
    if source is None:
        source = SyntheticImageSource(seed=link.seed)
    base = parse_utc(start_time)
    outcomes = []
    for cam_index, camera in enumerate(cameras):
        for seq in range(images_per_camera):
            capture = source.capture(camera.camera_id, seq, modality=camera.modality)
            captured_at = format_utc(
                base + timedelta(seconds=cam_index * 7 + seq * capture_interval_s))
            outcome = _deliver_one(store, camera, seq, capture, captured_at,
                                   link, chunk_size)
            if plant_truth_sidecars and store.has(outcome.sha256):
                store.write_truth_sidecar(outcome.sha256, capture.truth_boxes)
            outcomes.append(outcome)
    return DeliveryReport(outcomes=outcomes, cameras=list(cameras))


def _deliver_one(store, camera, seq, capture, captured_at, link, chunk_size):
    data = capture.image_bytes
    sha = hashlib.sha256(data).hexdigest()
    manifest = UploadManifest(
        station_id=f"station-{camera.site_name}",
        camera_id=camera.camera_id,
        captured_at=captured_at,
        content_sha256=sha,
        byte_length=len(data),
        modality=capture.modality,
        sequence_no=seq,
    )
    rng = random.Random(f"{link.seed}:{camera.camera_id}:{seq}:link")
    transmissions = 0
    duplicates = 0
    latency = 0.0
    acked = False
    attempts_left = link.max_retries + 1
    while attempts_left > 0 and not acked:
        attempts_left -= 1
        begun = store.begin_upload(manifest)
        latency += 2 * link.latency_ms
        if isinstance(begun, AlreadyStored):
            duplicates += 1
            acked = True
            break
        offset = begun.resume_offset
        remaining = data[offset:]
        if remaining:
            transmissions += 1
            if rng.random() < link.drop_rate:
                # transfer dies mid-flight; some prefix may have landed
                landed = rng.randint(0, max(len(remaining) - 1, 0))
                offset = _send(store, begun, data, offset, offset + landed, chunk_size)
                latency += link.latency_ms + 1000.0 * landed / link.bandwidth_bytes_per_s
                continue
            offset = _send(store, begun, data, offset, len(data), chunk_size)
            latency += link.latency_ms + 1000.0 * len(remaining) / link.bandwidth_bytes_per_s
        store.finalize_upload(begun)
        latency += 2 * link.latency_ms
        if rng.random() < link.drop_rate:
            continue  # finalize ack lost; station will re-offer and hit dedupe
        acked = True
    return DeliveryOutcome(
        sha256=sha, camera_id=camera.camera_id, sequence_no=seq,
        delivered=store.has(sha), transmissions=transmissions,
        duplicate_deliveries=duplicates, latency_ms=latency)


def _send(store, session, data, offset, end, chunk_size):
    while offset < end:
        chunk = data[offset:min(offset + chunk_size, end)]
        offset = store.append_chunk(session, offset, chunk)
    return offset
