"""Reviewer corrections: confirm / relabel / reject verdicts on detection events."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import ValidationError
from ..geometry import Box

VERDICTS = ("confirm", "relabel", "reject")


@dataclass(frozen=True)
class Correction:
    event_id: str
    verdict: str
    actor: str
    ts: str
    corrected_label: str | None = None
    corrected_bbox: Box | None = None

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValidationError(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")
        if self.verdict == "relabel" and not self.corrected_label:
            raise ValidationError("relabel requires corrected_label")
        if not self.event_id:
            raise ValidationError("correction needs an event_id")

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "verdict": self.verdict,
            "actor": self.actor,
            "ts": self.ts,
            "corrected_label": self.corrected_label,
            "corrected_bbox": self.corrected_bbox.as_list() if self.corrected_bbox else None,
        }


def parse_correction(data: dict) -> Correction:
    if not isinstance(data, dict):
        raise ValidationError("correction must be a JSON object")
    try:
        bbox = data.get("corrected_bbox")
        return Correction(
            event_id=data["event_id"],
            verdict=data["verdict"],
            actor=data.get("actor", ""),
            ts=data.get("ts", ""),
            corrected_label=data.get("corrected_label"),
            corrected_bbox=Box.from_list(bbox) if bbox else None,
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed correction {data!r}: {exc}") from exc


def load_corrections(path: str | Path) -> list[Correction]:
    """JSON Lines, one correction per line."""
    corrections = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                corrections.append(parse_correction(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: not JSON: {exc}") from exc
    return corrections
