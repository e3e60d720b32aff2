"""Camera registry: which cameras exist, where, and whether they are realtime."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import ValidationError
from .manifest import MODALITIES


@dataclass(frozen=True)
class CameraSource:
    camera_id: str
    site_name: str
    region: str
    realtime: bool
    zone_id: str | None = None
    modality: str = "visual"

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ValidationError(f"modality must be one of {MODALITIES}")

    def to_dict(self) -> dict:
        return {
            "camera_id": self.camera_id,
            "site_name": self.site_name,
            "region": self.region,
            "realtime": self.realtime,
            "zone_id": self.zone_id,
            "modality": self.modality,
        }


def load_camera_registry(path: str | Path) -> dict[str, CameraSource]:
    """Parse a JSON array of camera objects into an id-keyed registry."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"unreadable camera registry {path}: {exc}") from exc
    if not isinstance(data, list):
        raise ValidationError("camera registry must be a JSON array")
    registry: dict[str, CameraSource] = {}
    for entry in data:
        try:
            cam = CameraSource(
                camera_id=entry["camera_id"],
                site_name=entry.get("site_name", ""),
                region=entry.get("region", ""),
                realtime=bool(entry.get("realtime", False)),
                zone_id=entry.get("zone_id"),
                modality=entry.get("modality", "visual"),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad camera entry {entry!r}: {exc}") from exc
        if cam.camera_id in registry:
            raise ValidationError(f"duplicate camera_id {cam.camera_id}")
        registry[cam.camera_id] = cam
    return registry


def save_camera_registry(cameras, path: str | Path) -> None:
    payload = [c.to_dict() for c in cameras]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
