"""Rigid training-data augmentation with exact box geometry.

Only transforms whose effect on boxes is exact are offered: 90-degree
rotation steps, integer pixel translations and horizontal flips. Variants
enumerate rotations x translations x flip, applied in that order, and the
truth boxes are transformed with the pixels. Translated boxes are clamped
to the frame; boxes clamped below 4 px on a side (or pushed fully out)
are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from ..geometry import Box

ROTATIONS = (0, 90, 180, 270)
MIN_BOX_SIDE = 4.0


@dataclass(frozen=True)
class AugmentSpec:
    rotations: tuple[int, ...] = (0,)
    translations: tuple[tuple[int, int], ...] = ((0, 0),)
    horizontal_flip: bool = False
    seed: int = 0  # reserved for sampled transforms; rigid set is exhaustive

    def __post_init__(self):
        for r in self.rotations:
            if r not in ROTATIONS:
                raise ValidationError(f"rotation must be one of {ROTATIONS}, got {r}")
        for t in self.translations:
            if len(t) != 2 or not all(isinstance(v, int) for v in t):
                raise ValidationError(f"translation must be an integer (dx, dy), got {t}")

    def normalized(self) -> "AugmentSpec":
        rotations = self.rotations or (0,)
        translations = self.translations or ((0, 0),)
        return AugmentSpec(tuple(rotations), tuple(tuple(t) for t in translations),
                           self.horizontal_flip, self.seed)


@dataclass
class AugmentVariant:
    name: str
    image: np.ndarray
    boxes: list[tuple[str, Box]] = field(default_factory=list)


def augment(image: np.ndarray, boxes, spec: AugmentSpec) -> list[AugmentVariant]:
    spec = spec.normalized()
    height, width = image.shape[:2]
    for _, box in boxes:
        if box.clamped(width, height) != box:
            raise ValidationError(f"truth box {box.as_list()} exceeds the {width}x{height} frame")
    flips = (False, True) if spec.horizontal_flip else (False,)
    variants = []
    for rotation in spec.rotations:
        for flip in flips:
            for dx, dy in spec.translations:
                img, bxs = _rotate(image, boxes, rotation)
                if flip:
                    img, bxs = _hflip(img, bxs)
                img, bxs = _translate(img, bxs, dx, dy)
                name = f"rot{rotation}" + ("_flip" if flip else "") + f"_dx{dx}_dy{dy}"
                variants.append(AugmentVariant(name=name, image=img, boxes=bxs))
    return variants


def _rotate(image, boxes, degrees):
    height, width = image.shape[:2]
    if degrees == 0:
        return image.copy(), [(label, box) for label, box in boxes]
    k = degrees // 90  # np.rot90 turns counter-clockwise
    rotated = np.rot90(image, k=k).copy()
    out = []
    for label, box in boxes:
        if degrees == 90:
            new = Box(box.y_min, width - box.x_max, box.y_max, width - box.x_min)
        elif degrees == 180:
            new = Box(width - box.x_max, height - box.y_max,
                      width - box.x_min, height - box.y_min)
        else:  # 270
            new = Box(height - box.y_max, box.x_min, height - box.y_min, box.x_max)
        out.append((label, new))
    return rotated, out


def _hflip(image, boxes):
    width = image.shape[1]
    flipped = np.fliplr(image).copy()
    return flipped, [(label, Box(width - box.x_max, box.y_min,
                                 width - box.x_min, box.y_max))
                     for label, box in boxes]


def _translate(image, boxes, dx, dy):
    if dx == 0 and dy == 0:
        return image, list(boxes)
    height, width = image.shape[:2]
    shifted = np.zeros_like(image)
    src_x0, src_x1 = max(0, -dx), min(width, width - dx)
    src_y0, src_y1 = max(0, -dy), min(height, height - dy)
    if src_x0 < src_x1 and src_y0 < src_y1:
        shifted[src_y0 + dy:src_y1 + dy, src_x0 + dx:src_x1 + dx] = \
            image[src_y0:src_y1, src_x0:src_x1]
    out = []
    for label, box in boxes:
        moved = box.translated(dx, dy).clamped(width, height)
        if moved is None or moved.width < MIN_BOX_SIDE or moved.height < MIN_BOX_SIDE:
            continue
        out.append((label, moved))
    return shifted, out
