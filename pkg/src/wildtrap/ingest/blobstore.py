"""Content-addressed image store with resumable, deduplicated uploads.

Layout under the store root:

    <root>/<first 2 hex>/<sha256>                 finalized image bytes
    <root>/<first 2 hex>/<sha256>.manifest.json   asset record sidecar
    <root>/<first 2 hex>/<sha256>.truth.json      optional truth sidecar
    <root>/staging/<sha256>.part                  partial upload bytes

Resume offsets are server-authoritative: the size of the staging file is
the one true offset for a given content hash, so an interrupted station
(or server) can pick up where the bytes actually stopped.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path

from ..errors import (
    ChunkOverflowError,
    IncompleteUploadError,
    IntegrityError,
    OutOfOrderChunkError,
    UnknownSessionError,
    ValidationError,
)
from ..geometry import Box
from ..timeutil import format_utc, now_utc
from .manifest import UploadManifest

DEFAULT_CHUNK_SIZE = 256 * 1024


@dataclass(frozen=True)
class ImageAsset:
    sha256: str
    byte_length: int
    stored_at: str
    manifest: UploadManifest

    def to_dict(self) -> dict:
        return {
            "sha256": self.sha256,
            "byte_length": self.byte_length,
            "stored_at": self.stored_at,
            "manifest": self.manifest.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ImageAsset":
        return cls(
            sha256=data["sha256"],
            byte_length=int(data["byte_length"]),
            stored_at=data["stored_at"],
            manifest=UploadManifest.from_dict(data["manifest"]),
        )


@dataclass(frozen=True)
class AlreadyStored:
    """begin_upload answer when the content hash is already finalized."""
    asset: ImageAsset


@dataclass(frozen=True)
class UploadSession:
    session_id: str
    manifest: UploadManifest
    resume_offset: int


class BlobStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.staging = self.root / "staging"
        self.staging.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._sha_locks: dict[str, threading.Lock] = {}
        self._sessions: dict[str, UploadManifest] = {}

    # -- path helpers ------------------------------------------------------

    def blob_path(self, sha256: str) -> Path:
        return self.root / sha256[:2] / sha256

    def sidecar_path(self, sha256: str) -> Path:
        return self.root / sha256[:2] / f"{sha256}.manifest.json"

    def truth_path(self, sha256: str) -> Path:
        return self.root / sha256[:2] / f"{sha256}.truth.json"

    def _part_path(self, sha256: str) -> Path:
        return self.staging / f"{sha256}.part"

    def _sha_lock(self, sha256: str) -> threading.Lock:
        with self._lock:
            return self._sha_locks.setdefault(sha256, threading.Lock())

    # -- upload protocol ---------------------------------------------------

    def begin_upload(self, manifest: UploadManifest) -> UploadSession | AlreadyStored:
        manifest.validate()
        sha = manifest.content_sha256
        with self._sha_lock(sha):
            if self.blob_path(sha).exists():
                return AlreadyStored(asset=self.load_asset(sha))
            part = self._part_path(sha)
            offset = part.stat().st_size if part.exists() else 0
            session_id = uuid.uuid4().hex
            with self._lock:
                self._sessions[session_id] = manifest
            return UploadSession(session_id=session_id, manifest=manifest,
                                 resume_offset=offset)

    def session_manifest(self, session_id: str) -> UploadManifest:
        with self._lock:
            manifest = self._sessions.get(session_id)
        if manifest is None:
            raise UnknownSessionError(f"unknown session {session_id}")
        return manifest

    def append_chunk(self, session: UploadSession | str, offset: int, data: bytes) -> int:
        manifest = self._resolve(session)
        sha = manifest.content_sha256
        with self._sha_lock(sha):
            if self.blob_path(sha).exists():
                raise OutOfOrderChunkError(
                    f"{sha} already finalized", resume_offset=manifest.byte_length)
            part = self._part_path(sha)
            current = part.stat().st_size if part.exists() else 0
            if offset != current:
                raise OutOfOrderChunkError(
                    f"offset {offset} does not match server offset {current}",
                    resume_offset=current)
            if current + len(data) > manifest.byte_length:
                raise ChunkOverflowError(
                    f"append of {len(data)} bytes at {current} exceeds declared "
                    f"length {manifest.byte_length}")
            with open(part, "ab") as fh:
                fh.write(data)
                fh.flush()
            return current + len(data)

    def finalize_upload(self, session: UploadSession | str) -> ImageAsset:
        manifest = self._resolve(session)
        sha = manifest.content_sha256
        with self._sha_lock(sha):
            if self.blob_path(sha).exists():
                return self.load_asset(sha)  # lost a dedupe race; absorb
            part = self._part_path(sha)
            size = part.stat().st_size if part.exists() else 0
            if size != manifest.byte_length:
                raise IncompleteUploadError(
                    f"received {size} of {manifest.byte_length} declared bytes")
            digest = _file_sha256(part)
            if digest != sha:
                part.unlink(missing_ok=True)
                raise IntegrityError(
                    f"stored bytes hash to {digest}, manifest declared {sha}")
            asset = ImageAsset(sha256=sha, byte_length=size,
                               stored_at=format_utc(now_utc()), manifest=manifest)
            blob = self.blob_path(sha)
            blob.parent.mkdir(parents=True, exist_ok=True)
            _atomic_write(self.sidecar_path(sha),
                          json.dumps(asset.to_dict(), sort_keys=True).encode())
            os.replace(part, blob)
            return asset

    def upload_bytes(self, manifest: UploadManifest, data: bytes,
                     chunk_size: int = DEFAULT_CHUNK_SIZE) -> ImageAsset:
        """Single-shot convenience path: begin, stream chunks, finalize."""
        outcome = self.begin_upload(manifest)
        if isinstance(outcome, AlreadyStored):
            return outcome.asset
        offset = outcome.resume_offset
        while offset < len(data):
            chunk = data[offset:offset + chunk_size]
            offset = self.append_chunk(outcome, offset, chunk)
        return self.finalize_upload(outcome)

    # -- lookups -----------------------------------------------------------

    def has(self, sha256: str) -> bool:
        return self.blob_path(sha256).exists()

    def get_bytes(self, sha256: str) -> bytes:
        path = self.blob_path(sha256)
        if not path.exists():
            raise ValidationError(f"no stored asset {sha256}")
        return path.read_bytes()

    def load_asset(self, sha256: str) -> ImageAsset:
        path = self.sidecar_path(sha256)
        if not path.exists():
            raise ValidationError(f"no asset record for {sha256}")
        return ImageAsset.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def resume_offset(self, sha256: str) -> int:
        part = self._part_path(sha256)
        return part.stat().st_size if part.exists() else 0

    def iter_assets(self):
        """Finalized assets in deterministic (hash) order."""
        for bucket in sorted(p for p in self.root.iterdir()
                             if p.is_dir() and len(p.name) == 2):
            for sidecar in sorted(bucket.glob("*.manifest.json")):
                sha = sidecar.name.split(".")[0]
                if self.blob_path(sha).exists():
                    yield self.load_asset(sha)

    def asset_count(self) -> int:
        return sum(1 for _ in self.iter_assets())

    # -- truth sidecars ----------------------------------------------------

    def write_truth_sidecar(self, sha256: str, boxes: list[tuple[str, Box]]) -> Path:
        path = self.truth_path(sha256)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"boxes": [{"label": label, "bbox": box.as_list()}
                             for label, box in boxes]}
        _atomic_write(path, json.dumps(payload, sort_keys=True).encode())
        return path

    def read_truth_sidecar(self, sha256: str) -> list[tuple[str, Box]] | None:
        path = self.truth_path(sha256)
        if not path.exists():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return [(entry["label"], Box.from_list(entry["bbox"]))
                for entry in data["boxes"]]

    def _resolve(self, session: UploadSession | str) -> UploadManifest:
        if isinstance(session, UploadSession):
            return session.manifest
        return self.session_manifest(session)


def _file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)
