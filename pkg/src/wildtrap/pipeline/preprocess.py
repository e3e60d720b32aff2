"""Inference-time preprocessing: orientation, resize to the model's input
long side (never upscaling), and bit-depth normalization to [0, 1].

Augmentation stays out of this path on purpose; random transforms belong
to the training-data side (see the curation package).
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageOps

from ..errors import DecodeError, ValidationError
from ..ingest.synth import DEFAULT_LABELS

SIXTEEN_BIT_MODES = ("I;16", "I;16B", "I;16L", "I;16N", "I")


@dataclass(frozen=True)
class ModelProfile:
    model_id: str
    region: str
    labels: tuple[str, ...]
    input_long_side: int = 1024
    default_min_confidence: float = 0.25

    def __post_init__(self):
        if not self.labels:
            raise ValidationError("profile needs at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("profile labels must be unique")
        if self.input_long_side < 32:
            raise ValidationError("input_long_side must be >= 32")
        if not 0.0 <= self.default_min_confidence <= 1.0:
            raise ValidationError("default_min_confidence outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "region": self.region,
            "labels": list(self.labels),
            "input_long_side": self.input_long_side,
            "default_min_confidence": self.default_min_confidence,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelProfile":
        try:
            return cls(
                model_id=data["model_id"],
                region=data.get("region", ""),
                labels=tuple(data["labels"]),
                input_long_side=int(data.get("input_long_side", 1024)),
                default_min_confidence=float(data.get("default_min_confidence", 0.25)),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed model profile: {exc}") from exc


def default_profile(model_id: str = "synthetic-mammals-v1",
                    region: str = "sub-saharan-africa") -> ModelProfile:
    return ModelProfile(model_id=model_id, region=region, labels=tuple(DEFAULT_LABELS))


@dataclass(frozen=True)
class PreprocessedImage:
    width: int
    height: int
    pixels: np.ndarray  # float64 intensities in [0, 1], HxW or HxWx3
    scale: float
    source_sha256: str
    orig_width: int
    orig_height: int

    def __eq__(self, other):
        if not isinstance(other, PreprocessedImage):
            return NotImplemented
        return (self.width, self.height, self.scale, self.source_sha256,
                self.orig_width, self.orig_height) == \
               (other.width, other.height, other.scale, other.source_sha256,
                other.orig_width, other.orig_height) \
               and np.array_equal(self.pixels, other.pixels)


def preprocess(data: bytes, profile: ModelProfile, source_sha256: str = "") -> PreprocessedImage:
    try:
        image = Image.open(io.BytesIO(data))
        image.load()
    except Exception as exc:
        raise DecodeError(f"undecodable image bytes: {exc}") from exc
    oriented = ImageOps.exif_transpose(image)
    if oriented is not None:
        image = oriented

    bit_max = 65535.0 if image.mode in SIXTEEN_BIT_MODES else 255.0
    if image.mode in ("P", "RGBA", "CMYK"):
        image = image.convert("RGB")
    elif image.mode == "LA":
        image = image.convert("L")

    orig_width, orig_height = image.size
    long_side = max(orig_width, orig_height)
    if long_side > profile.input_long_side:
        scale = profile.input_long_side / long_side
        new_size = (max(1, round(orig_width * scale)), max(1, round(orig_height * scale)))
        if image.mode.startswith("I;16"):
            image = image.convert("I")
        image = image.resize(new_size, Image.BILINEAR)
    else:
        scale = 1.0

    pixels = np.asarray(image, dtype=np.float64) / bit_max
    width, height = image.size
    return PreprocessedImage(
        width=width, height=height, pixels=pixels, scale=scale,
        source_sha256=source_sha256, orig_width=orig_width, orig_height=orig_height)
