"""Deterministic synthetic camera-trap frames with known truth boxes.

Each (camera, sequence) pair yields a unique image: seeded noise plus an
identity stamp in the first pixel row, with bright "animal" rectangles
placed on a non-overlapping grid so jittered detections can never claim a
neighbouring box. Visual cameras produce 8-bit RGB PNGs, thermal cameras
16-bit grayscale PNGs.
"""

from __future__ import annotations

import io
import random
from dataclasses import dataclass

import numpy as np
from PIL import Image

from ..geometry import Box

DEFAULT_LABELS = ("elephant", "zebra", "rhino", "pangolin", "human", "vehicle")


@dataclass(frozen=True)
class SyntheticCapture:
    image_bytes: bytes
    truth_boxes: list[tuple[str, Box]]
    width: int
    height: int
    modality: str


@dataclass
class SyntheticImageSource:
    seed: int = 0
    labels: tuple[str, ...] = DEFAULT_LABELS
    width: int = 480
    height: int = 360
    min_boxes: int = 1
    max_boxes: int = 3
    box_size: int = 60
    margin: int = 24

    def __post_init__(self):
        cell = self.box_size + self.margin
        self._cols = max(1, (self.width - self.margin) // cell)
        self._rows = max(1, (self.height - self.margin) // cell)
        if self.max_boxes > self._cols * self._rows:
            raise ValueError(
                f"cannot place {self.max_boxes} boxes of {self.box_size}px "
                f"in a {self.width}x{self.height} frame")

    def capture(self, camera_id: str, sequence_no: int,
                modality: str = "visual") -> SyntheticCapture:
        rng = random.Random(f"{self.seed}:{camera_id}:{sequence_no}")
        n_boxes = rng.randint(self.min_boxes, self.max_boxes)
        cell = self.box_size + self.margin
        cells = rng.sample(range(self._cols * self._rows), n_boxes)
        boxes = []
        for index in cells:
            col, row = index % self._cols, index // self._cols
            x0 = self.margin // 2 + col * cell + rng.randint(0, self.margin // 2)
            y0 = self.margin // 2 + row * cell + rng.randint(0, self.margin // 2)
            boxes.append((rng.choice(self.labels),
                          Box(x0, y0, x0 + self.box_size, y0 + self.box_size)))
        data = self._render(rng, boxes, camera_id, sequence_no, modality)
        return SyntheticCapture(image_bytes=data, truth_boxes=boxes,
                                width=self.width, height=self.height,
                                modality=modality)

    def _render(self, rng, boxes, camera_id, sequence_no, modality) -> bytes:
        np_rng = np.random.default_rng(rng.getrandbits(32))
        if modality == "thermal":
            canvas = (np_rng.random((self.height, self.width)) * 8192).astype(np.uint16)
            for i, (_, box) in enumerate(boxes):
                canvas[int(box.y_min):int(box.y_max),
                       int(box.x_min):int(box.x_max)] = 40000 + i * 4000
            stamp = f"{camera_id}:{sequence_no}".encode()
            canvas[0, :len(stamp)] = np.frombuffer(stamp, dtype=np.uint8)
            image = Image.frombytes("I;16", (self.width, self.height),
                                    canvas.astype("<u2").tobytes())
        else:
            canvas = (np_rng.random((self.height, self.width, 3)) * 48).astype(np.uint8)
            for i, (_, box) in enumerate(boxes):
                shade = 120 + (i * 37) % 120
                canvas[int(box.y_min):int(box.y_max),
                       int(box.x_min):int(box.x_max)] = (shade, 255 - shade, 90)
            stamp = f"{camera_id}:{sequence_no}".encode()
            canvas[0, :len(stamp), 0] = np.frombuffer(stamp, dtype=np.uint8)
            image = Image.fromarray(canvas, mode="RGB")
        buf = io.BytesIO()
        image.save(buf, format="PNG")
        return buf.getvalue()
