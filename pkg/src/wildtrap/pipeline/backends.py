"""Detector backends and the mapping of their output back to image space.

A backend sees the preprocessed (resized) frame and answers boxes in that
frame's coordinates; ``infer`` maps them back through the preprocess scale
into original pixel coordinates, clamps, filters by confidence and sorts.
The synthetic backend reads planted truth sidecars (optionally jittered,
seeded per image) so whole-pipeline runs are deterministic without any
neural model; the remote backend speaks the detect wire protocol.
"""

from __future__ import annotations

import base64
import json
import random
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field

from ..errors import (
    BackendUnavailableError,
    ConfigurationError,
    ProtocolViolationError,
    ValidationError,
)
from ..geometry import Box
from ..ingest.blobstore import BlobStore
from .preprocess import ModelProfile, PreprocessedImage


@dataclass(frozen=True)
class Detection:
    """A labelled, scored box in original image pixel coordinates."""
    label: str
    confidence: float
    bbox: Box
    model_id: str

    def to_dict(self) -> dict:
        return {"label": self.label, "confidence": self.confidence,
                "bbox": self.bbox.as_list(), "model_id": self.model_id}


@dataclass(frozen=True)
class RawDetection:
    """Backend output, still in resized-frame coordinates."""
    label: str
    confidence: float
    bbox: Box


@dataclass(frozen=True)
class DetectRequest:
    pre: PreprocessedImage
    profile: ModelProfile
    min_confidence: float
    image_bytes: bytes = b""


def synthetic_detect(sha256: str, store: BlobStore, *, jitter_px: float = 0.0,
                     seed: int = 0, latency_ms: float = 0.0,
                     fixed: list[Detection] | None = None,
                     model_id: str = "synthetic") -> list[Detection]:
    """Detections straight from an image's truth sidecar (original coords).

    Every coordinate of every truth box is shifted by a seeded uniform
    draw from [-jitter_px, +jitter_px]; identical seeds give identical
    output. ``fixed`` bypasses the sidecar entirely.
    """
    if latency_ms > 0:
        time.sleep(latency_ms / 1000.0)
    if fixed is not None:
        return list(fixed)
    truth = store.read_truth_sidecar(sha256)
    if truth is None:
        raise ConfigurationError(f"no truth sidecar for {sha256}")
    rng = random.Random(f"{seed}:{sha256}")
    detections = []
    for label, box in truth:
        corners = [box.x_min + rng.uniform(-jitter_px, jitter_px),
                   box.y_min + rng.uniform(-jitter_px, jitter_px),
                   box.x_max + rng.uniform(-jitter_px, jitter_px),
                   box.y_max + rng.uniform(-jitter_px, jitter_px)]
        confidence = rng.uniform(0.6, 0.99)
        x0, x1 = sorted(corners[0::2])
        y0, y1 = sorted(corners[1::2])
        if x1 <= x0:
            x1 = x0 + 1e-3
        if y1 <= y0:
            y1 = y0 + 1e-3
        detections.append(Detection(label=label, confidence=confidence,
                                    bbox=Box(x0, y0, x1, y1), model_id=model_id))
    return detections


@dataclass
class SyntheticBackend:
    """In-process backend over truth sidecars or a fixed detection list."""
    store: BlobStore | None = None
    model_id: str = "synthetic-mammals-v1"
    jitter_px: float = 0.0
    seed: int = 0
    latency_ms: float = 0.0
    fixed: list[Detection] | None = None

    def detect(self, request: DetectRequest) -> list[RawDetection]:
        detections = synthetic_detect(
            request.pre.source_sha256, self.store, jitter_px=self.jitter_px,
            seed=self.seed, latency_ms=self.latency_ms, fixed=self.fixed,
            model_id=self.model_id)
        scale = request.pre.scale
        return [RawDetection(d.label, d.confidence, d.bbox.scaled(scale))
                for d in detections]


@dataclass
class RemoteBackend:
    """Client for the detect wire protocol (JSON over HTTP)."""
    url: str
    model_id: str
    timeout_s: float = 10.0
    last_latency_ms: float = field(default=0.0, init=False)

    def detect(self, request: DetectRequest) -> list[RawDetection]:
        payload = json.dumps({
            "model_id": self.model_id,
            "image_b64": base64.b64encode(request.image_bytes).decode("ascii"),
            "min_confidence": request.min_confidence,
        }).encode("utf-8")
        req = urllib.request.Request(
            self.url.rstrip("/") + "/v1/detect", data=payload,
            headers={"Content-Type": "application/json"}, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                body = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise BackendUnavailableError(f"detector at {self.url}: {exc}") from exc
        try:
            self.last_latency_ms = float(body.get("latency_ms", 0.0))
            return [RawDetection(label=d["label"], confidence=float(d["confidence"]),
                                 bbox=Box.from_list(d["bbox"]))
                    for d in body["detections"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolViolationError(f"malformed detector response: {exc}") from exc


def infer(pre: PreprocessedImage, backend, profile: ModelProfile,
          min_confidence: float, *, image_bytes: bytes = b"") -> list[Detection]:
    """Run one preprocessed frame through a backend into original coordinates.

    Output is confidence-descending (ties broken by label then x_min) and
    already filtered by ``min_confidence``.
    """
    if not 0.0 <= min_confidence <= 1.0:
        raise ValidationError(f"min_confidence {min_confidence} outside [0, 1]")
    request = DetectRequest(pre=pre, profile=profile,
                            min_confidence=min_confidence, image_bytes=image_bytes)
    raw = backend.detect(request)
    model_id = getattr(backend, "model_id", "unknown")
    detections = []
    for r in raw:
        if r.label not in profile.labels:
            raise ProtocolViolationError(
                f"backend returned label {r.label!r} outside the profile's label set")
        if r.confidence < min_confidence:
            continue
        box = r.bbox.scaled(1.0 / pre.scale)
        clamped = box.clamped(pre.orig_width, pre.orig_height)
        if clamped is None:
            continue
        detections.append(Detection(label=r.label, confidence=r.confidence,
                                    bbox=clamped, model_id=model_id))
    detections.sort(key=lambda d: (-d.confidence, d.label, d.bbox.x_min))
    return detections
