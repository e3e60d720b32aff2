"""COCO-style ground truth files and detection JSON Lines.

Ground truth uses the usual three-table layout (``images``, ``annotations``
with ``[x, y, width, height]`` boxes, ``categories``); internally everything
is converted to corner-form boxes. Serialization is canonical (sorted keys,
2-space indent) so that write -> parse -> write is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ValidationError
from ..geometry import Box

ImageId = int | str


@dataclass(frozen=True)
class GroundTruthBox:
    image_id: ImageId
    label: str
    bbox: Box


@dataclass(frozen=True)
class DetectionRecord:
    image_id: ImageId
    label: str
    confidence: float
    bbox: Box

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class CocoImage:
    id: ImageId
    width: int
    height: int
    file_name: str


@dataclass(frozen=True)
class CocoAnnotation:
    id: int
    image_id: ImageId
    category_id: int
    bbox: tuple[float, float, float, float]  # x, y, width, height


@dataclass(frozen=True)
class CocoCategory:
    id: int
    name: str


@dataclass
class CocoDataset:
    images: list[CocoImage] = field(default_factory=list)
    annotations: list[CocoAnnotation] = field(default_factory=list)
    categories: list[CocoCategory] = field(default_factory=list)

    def validate(self) -> None:
        image_ids = {img.id for img in self.images}
        if len(image_ids) != len(self.images):
            raise ValidationError("duplicate image ids")
        cat_ids = {c.id for c in self.categories}
        if len(cat_ids) != len(self.categories):
            raise ValidationError("duplicate category ids")
        names = [c.name for c in self.categories]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate category names")
        for ann in self.annotations:
            if ann.image_id not in image_ids:
                raise ValidationError(f"annotation {ann.id} references unknown image {ann.image_id}")
            if ann.category_id not in cat_ids:
                raise ValidationError(f"annotation {ann.id} references unknown category {ann.category_id}")
            if ann.bbox[2] <= 0 or ann.bbox[3] <= 0:
                raise ValidationError(f"annotation {ann.id} has non-positive box size")

    def category_name(self, category_id: int) -> str:
        for c in self.categories:
            if c.id == category_id:
                return c.name
        raise ValidationError(f"unknown category id {category_id}")

    def ground_truth_boxes(self) -> list[GroundTruthBox]:
        """Annotations as corner-form labelled boxes."""
        by_id = {c.id: c.name for c in self.categories}
        out = []
        for ann in self.annotations:
            x, y, w, h = ann.bbox
            out.append(GroundTruthBox(ann.image_id, by_id[ann.category_id],
                                      Box(x, y, x + w, y + h)))
        return out

    def to_dict(self) -> dict:
        return {
            "images": [
                {"id": i.id, "width": i.width, "height": i.height, "file_name": i.file_name}
                for i in self.images
            ],
            "annotations": [
                {"id": a.id, "image_id": a.image_id, "category_id": a.category_id,
                 "bbox": [float(v) for v in a.bbox]}
                for a in self.annotations
            ],
            "categories": [{"id": c.id, "name": c.name} for c in self.categories],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "CocoDataset":
        try:
            images = [CocoImage(i["id"], int(i["width"]), int(i["height"]), str(i["file_name"]))
                      for i in data.get("images", [])]
            annotations = [
                CocoAnnotation(int(a["id"]), a["image_id"], int(a["category_id"]),
                               tuple(float(v) for v in a["bbox"]))
                for a in data.get("annotations", [])
            ]
            categories = [CocoCategory(int(c["id"]), str(c["name"]))
                          for c in data.get("categories", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed ground truth file: {exc}") from exc
        ds = cls(images=images, annotations=annotations, categories=categories)
        ds.validate()
        return ds

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "CocoDataset":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"ground truth file is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def load_ground_truth(path: str | Path) -> CocoDataset:
    return CocoDataset.load(path)


def load_detections_jsonl(path: str | Path) -> list[DetectionRecord]:
    """One detection per line: ``{"image_id", "label", "confidence", "bbox"}``."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(DetectionRecord(
                    image_id=obj["image_id"],
                    label=str(obj["label"]),
                    confidence=float(obj["confidence"]),
                    bbox=Box.from_list(obj["bbox"]),
                ))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"bad detection at line {lineno}: {exc}") from exc
    return records


def save_detections_jsonl(records, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps({
                "image_id": rec.image_id,
                "label": rec.label,
                "confidence": rec.confidence,
                "bbox": rec.bbox.as_list(),
            }) + "\n")
