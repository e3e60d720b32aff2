"""Shared fixtures-adjacent helpers for building stores and uploads."""

import hashlib

from wildtrap.ingest import BlobStore, SyntheticImageSource, UploadManifest


def upload_capture(blobs: BlobStore, capture, camera_id="cam-000", seq=0,
                   captured_at="2025-01-01T00:00:00Z", plant_truth=True):
    data = capture.image_bytes
    manifest = UploadManifest(
        station_id="station-1",
        camera_id=camera_id,
        captured_at=captured_at,
        content_sha256=hashlib.sha256(data).hexdigest(),
        byte_length=len(data),
        modality=capture.modality,
        sequence_no=seq,
    )
    asset = blobs.upload_bytes(manifest, data)
    if plant_truth:
        blobs.write_truth_sidecar(asset.sha256, capture.truth_boxes)
    return asset


def upload_raw(blobs: BlobStore, data: bytes, camera_id="cam-000", seq=0,
               captured_at="2025-01-01T00:00:00Z"):
    manifest = UploadManifest(
        station_id="station-1",
        camera_id=camera_id,
        captured_at=captured_at,
        content_sha256=hashlib.sha256(data).hexdigest(),
        byte_length=len(data),
        modality="visual",
        sequence_no=seq,
    )
    return blobs.upload_bytes(manifest, data)


def small_source(seed=0, **overrides):
    params = dict(seed=seed, width=320, height=240, box_size=60, margin=20,
                  min_boxes=1, max_boxes=2)
    params.update(overrides)
    return SyntheticImageSource(**params)
