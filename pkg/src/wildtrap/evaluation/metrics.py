"""IoU matching, precision-recall curves, per-class AP and mAP@threshold.

Matching is the standard confidence-ranked greedy rule per (image, label):
each detection, highest confidence first, claims the unmatched ground truth
with the largest IoU, provided that IoU clears the threshold; everything
else is a false positive. Per-class AP integrates the interpolated PR
envelope (all-points by default, eleven-point behind a flag) and mAP is the
arithmetic mean across classes that have ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from ..errors import ValidationError
from ..geometry import Box
from .coco import CocoDataset, DetectionRecord, GroundTruthBox, load_detections_jsonl

INTERPOLATIONS = ("all_points", "eleven_point")


@dataclass(frozen=True)
class EvalConfig:
    iou_threshold: float = 0.5
    interpolation: str = "all_points"

    def __post_init__(self):
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValidationError(f"iou_threshold {self.iou_threshold} outside (0, 1]")
        if self.interpolation not in INTERPOLATIONS:
            raise ValidationError(f"interpolation must be one of {INTERPOLATIONS}")


class PRPoint(NamedTuple):
    recall: float
    precision: float
    confidence: float


@dataclass(frozen=True)
class MatchOutcome:
    det_index: int
    matched_gt_index: int | None
    iou: float

    @property
    def is_tp(self) -> bool:
        return self.matched_gt_index is not None


class RankedOutcome(NamedTuple):
    """A detection's fate in confidence rank order, as consumed by pr_curve."""
    confidence: float
    is_tp: bool


@dataclass
class ClassResult:
    label: str
    ap: float
    n_ground_truth: int
    n_detections: int
    pr_points: list[PRPoint]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "ap": self.ap,
            "n_ground_truth": self.n_ground_truth,
            "n_detections": self.n_detections,
            "pr_points": [{"recall": p.recall, "precision": p.precision,
                           "confidence": p.confidence} for p in self.pr_points],
        }


@dataclass
class EvalReport:
    per_class: list[ClassResult]
    map: float
    excluded: list[dict]
    combined_pr_points: list[PRPoint]
    combined_n_ground_truth: int
    config: EvalConfig = field(default_factory=EvalConfig)

    def to_dict(self) -> dict:
        return {
            "config": {"iou_threshold": self.config.iou_threshold,
                       "interpolation": self.config.interpolation},
            "map": self.map,
            "per_class": [c.to_dict() for c in self.per_class],
            "excluded": self.excluded,
            "combined": {
                "n_ground_truth": self.combined_n_ground_truth,
                "pr_points": [{"recall": p.recall, "precision": p.precision,
                               "confidence": p.confidence} for p in self.combined_pr_points],
            },
        }


def iou(a: Box, b: Box) -> float:
    """Intersection area over union area; 0 for disjoint boxes."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    union = a.area() + b.area() - inter
    return inter / union


def match_detections(dets: Sequence[DetectionRecord],
                     gts: Sequence[GroundTruthBox],
                     config: EvalConfig = EvalConfig()) -> list[MatchOutcome]:
    """Greedy-match one image's same-label detections against its ground truths.

    Returns outcomes in confidence rank order (ties broken by input order).
    Each ground truth is claimed at most once.
    """
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, i))
    claimed = [False] * len(gts)
    outcomes = []
    for i in order:
        best_j = None
        best_iou = 0.0
        for j, gt in enumerate(gts):
            if claimed[j]:
                continue
            v = iou(dets[i].bbox, gt.bbox)
            if v > best_iou:
                best_j, best_iou = j, v
        if best_j is not None and best_iou >= config.iou_threshold:
            claimed[best_j] = True
            outcomes.append(MatchOutcome(i, best_j, best_iou))
        else:
            outcomes.append(MatchOutcome(i, None, best_iou))
    return outcomes


def pr_curve(ranked: Sequence[RankedOutcome], n_ground_truth: int) -> list[PRPoint]:
    """Cumulative precision/recall over a confidence-ranked outcome list.

    Point k uses the first k detections: precision = TP_k / k and
    recall = TP_k / n_ground_truth (recall 0 when there is no ground truth).
    """
    if n_ground_truth < 0:
        raise ValidationError("n_ground_truth must be >= 0")
    points = []
    tp = 0
    for k, outcome in enumerate(ranked, start=1):
        if outcome.is_tp:
            tp += 1
        recall = tp / n_ground_truth if n_ground_truth > 0 else 0.0
        points.append(PRPoint(recall=recall, precision=tp / k, confidence=outcome.confidence))
    return points


def _envelope(points: Sequence[PRPoint]) -> list[float]:
    """Interpolated precision at each point: max precision at recall >= that point's."""
    env = [p.precision for p in points]
    for i in range(len(env) - 2, -1, -1):
        env[i] = max(env[i], env[i + 1])
    return env


def average_precision(pr_points: Sequence[PRPoint],
                      interpolation: str = "all_points") -> float:
    if interpolation not in INTERPOLATIONS:
        raise ValidationError(f"interpolation must be one of {INTERPOLATIONS}")
    if not pr_points:
        return 0.0
    env = _envelope(pr_points)
    if interpolation == "all_points":
        ap = 0.0
        prev_recall = 0.0
        for point, env_precision in zip(pr_points, env):
            ap += (point.recall - prev_recall) * env_precision
            prev_recall = point.recall
        return ap
    # eleven_point: mean interpolated precision at recalls 0, 0.1, ..., 1.0
    total = 0.0
    for step in range(11):
        r = step / 10.0
        best = 0.0
        for point, env_precision in zip(pr_points, env):
            if point.recall >= r - 1e-12:
                best = env_precision
                break
        total += best
    return total / 11.0


def _rank_key(det: DetectionRecord, input_index: int):
    # deterministic tie-break: confidence desc, then image id, then input order
    return (-det.confidence, str(det.image_id), input_index)


def evaluate(detections: Sequence[DetectionRecord],
             ground_truths: Sequence[GroundTruthBox],
             config: EvalConfig = EvalConfig()) -> EvalReport:
    """Score detections against ground truth, per class and combined.

    Classes present in the ground truth each get a PR curve and an AP; mAP
    averages those APs. Detection labels with no ground truth anywhere are
    reported in ``excluded`` and do not influence the mean.
    """
    gt_labels = sorted({gt.label for gt in ground_truths})
    gt_by_label_image: dict[str, dict] = {}
    for gt in ground_truths:
        gt_by_label_image.setdefault(gt.label, {}).setdefault(gt.image_id, []).append(gt)

    dets_by_label_image: dict[str, dict] = {}
    for idx, det in enumerate(detections):
        dets_by_label_image.setdefault(det.label, {}).setdefault(det.image_id, []).append((idx, det))

    per_class = []
    combined_entries = []  # (rank_key, RankedOutcome) pooled over classes with ground truth
    combined_gt = 0
    for label in gt_labels:
        gt_images = gt_by_label_image.get(label, {})
        n_gt = sum(len(v) for v in gt_images.values())
        combined_gt += n_gt
        entries = []
        det_images = dets_by_label_image.get(label, {})
        for image_id, pairs in det_images.items():
            image_dets = [det for _, det in pairs]
            outcomes = match_detections(image_dets, gt_images.get(image_id, []), config)
            for outcome in outcomes:
                input_index, det = pairs[outcome.det_index]
                entries.append((_rank_key(det, input_index),
                                RankedOutcome(det.confidence, outcome.is_tp)))
        entries.sort(key=lambda e: e[0])
        ranked = [ro for _, ro in entries]
        points = pr_curve(ranked, n_gt)
        ap = average_precision(points, config.interpolation)
        per_class.append(ClassResult(label=label, ap=ap, n_ground_truth=n_gt,
                                     n_detections=len(ranked), pr_points=points))
        combined_entries.extend(entries)

    excluded = []
    for label in sorted(dets_by_label_image):
        if label not in gt_by_label_image:
            n = sum(len(v) for v in dets_by_label_image[label].values())
            excluded.append({"label": label, "n_detections": n, "reason": "no_ground_truth"})

    combined_entries.sort(key=lambda e: e[0])
    combined_points = pr_curve([ro for _, ro in combined_entries], combined_gt)

    mean_ap = (math.fsum(c.ap for c in per_class) / len(per_class)) if per_class else 0.0
    return EvalReport(per_class=per_class, map=mean_ap, excluded=excluded,
                      combined_pr_points=combined_points,
                      combined_n_ground_truth=combined_gt, config=config)


def evaluate_files(detections_path, ground_truth_path,
                   config: EvalConfig = EvalConfig()) -> EvalReport:
    dataset = CocoDataset.load(ground_truth_path)
    detections = load_detections_jsonl(detections_path)
    return evaluate(detections, dataset.ground_truth_boxes(), config)
