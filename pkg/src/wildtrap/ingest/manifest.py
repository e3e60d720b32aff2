"""Upload manifests as sent by field stations."""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass

from ..errors import ValidationError
from ..timeutil import parse_utc

MODALITIES = ("visual", "thermal")

_SHA256_RE = re.compile(r"^[0-9a-f]{64}$")


@dataclass(frozen=True)
class UploadManifest:
    station_id: str
    camera_id: str
    captured_at: str  # ISO 8601 UTC
    content_sha256: str
    byte_length: int
    modality: str
    sequence_no: int

    def validate(self) -> None:
        if not self.station_id or not isinstance(self.station_id, str):
            raise ValidationError("station_id must be a non-empty string")
        if not self.camera_id or not isinstance(self.camera_id, str):
            raise ValidationError("camera_id must be a non-empty string")
        parse_utc(self.captured_at)
        if not isinstance(self.content_sha256, str) or not _SHA256_RE.match(self.content_sha256):
            raise ValidationError(f"content_sha256 must be 64 lowercase hex chars")
        if not isinstance(self.byte_length, int) or isinstance(self.byte_length, bool) \
                or self.byte_length <= 0:
            raise ValidationError(f"byte_length must be a positive integer, got {self.byte_length!r}")
        if self.modality not in MODALITIES:
            raise ValidationError(f"modality must be one of {MODALITIES}, got {self.modality!r}")
        if not isinstance(self.sequence_no, int) or isinstance(self.sequence_no, bool) \
                or self.sequence_no < 0:
            raise ValidationError("sequence_no must be a non-negative integer")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "UploadManifest":
        if not isinstance(data, dict):
            raise ValidationError("manifest body must be a JSON object")
        required = ("station_id", "camera_id", "captured_at", "content_sha256",
                    "byte_length", "modality", "sequence_no")
        missing = [k for k in required if k not in data]
        if missing:
            raise ValidationError(f"manifest missing fields: {', '.join(missing)}")
        manifest = cls(
            station_id=data["station_id"],
            camera_id=data["camera_id"],
            captured_at=data["captured_at"],
            content_sha256=data["content_sha256"],
            byte_length=data["byte_length"],
            modality=data["modality"],
            sequence_no=data["sequence_no"],
        )
        manifest.validate()
        return manifest
