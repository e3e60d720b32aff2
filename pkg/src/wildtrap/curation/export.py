"""Export reviewed detections as a training dataset.

Confirmed and relabelled detections become annotations; rejected ones are
dropped. Output is the same COCO-style schema the evaluation reader
consumes (three tables, ``[x, y, w, h]`` boxes) with fully deterministic
ids and canonical JSON, so export -> parse -> export is byte-identical.
"""

from __future__ import annotations

import math
from typing import Callable, Mapping

from ..errors import ValidationError
from ..evaluation.coco import CocoAnnotation, CocoCategory, CocoDataset, CocoImage
from ..store.events import DetectionEvent
from .corrections import Correction

POLICIES = ("confirmed_only", "include_unreviewed")


def export_training_manifest(events, corrections, policy: str = "confirmed_only",
                             image_info: Mapping | Callable | None = None) -> CocoDataset:
    """Build the dataset; ``image_info`` maps sha256 -> (width, height) when
    real dimensions are known (otherwise a padded box extent is used)."""
    if policy not in POLICIES:
        raise ValidationError(f"policy must be one of {POLICIES}, got {policy!r}")
    events = list(events)
    by_event_id = {ev.event_id: ev for ev in events}
    latest: dict[str, Correction] = {}
    for correction in corrections:
        if correction.event_id not in by_event_id:
            raise ValidationError(f"correction references unknown event {correction.event_id}")
        latest[correction.event_id] = correction  # last review wins

    included: list[tuple[DetectionEvent, str, object]] = []  # (event, label, box)
    for event in events:
        correction = latest.get(event.event_id)
        if correction is None:
            if policy == "confirmed_only":
                continue
            included.append((event, event.label, event.bbox))
        elif correction.verdict == "reject":
            continue
        else:
            label = (correction.corrected_label
                     if correction.verdict == "relabel" else event.label)
            box = correction.corrected_bbox or event.bbox
            included.append((event, label, box))

    shas = sorted({event.image_sha256 for event, _, _ in included})
    image_ids = {sha: i + 1 for i, sha in enumerate(shas)}
    labels = sorted({label for _, label, _ in included})
    category_ids = {label: i + 1 for i, label in enumerate(labels)}

    images = []
    for sha in shas:
        dims = _lookup_dims(image_info, sha)
        if dims is None:
            boxes = [box for event, _, box in included if event.image_sha256 == sha]
            dims = (int(math.ceil(max(b.x_max for b in boxes))) + 1,
                    int(math.ceil(max(b.y_max for b in boxes))) + 1)
        images.append(CocoImage(id=image_ids[sha], width=dims[0], height=dims[1],
                                file_name=f"{sha}.png"))

    annotations = []
    ordered = sorted(included, key=lambda item: (image_ids[item[0].image_sha256],
                                                 item[0].event_id))
    for ann_id, (event, label, box) in enumerate(ordered, start=1):
        annotations.append(CocoAnnotation(
            id=ann_id,
            image_id=image_ids[event.image_sha256],
            category_id=category_ids[label],
            bbox=(box.x_min, box.y_min, box.width, box.height),
        ))

    dataset = CocoDataset(
        images=images,
        annotations=annotations,
        categories=[CocoCategory(id=category_ids[label], name=label) for label in labels],
    )
    dataset.validate()
    return dataset


def _lookup_dims(image_info, sha):
    if image_info is None:
        return None
    if callable(image_info):
        return image_info(sha)
    return image_info.get(sha)
