"""Ground-truth scoring of detector output: IoU matching, PR curves, AP and mAP."""

from .coco import (
    CocoAnnotation,
    CocoCategory,
    CocoDataset,
    CocoImage,
    DetectionRecord,
    GroundTruthBox,
    load_detections_jsonl,
    load_ground_truth,
)
from .export import export_pr_plot_data
from .metrics import (
    ClassResult,
    EvalConfig,
    EvalReport,
    MatchOutcome,
    PRPoint,
    RankedOutcome,
    average_precision,
    evaluate,
    evaluate_files,
    iou,
    match_detections,
    pr_curve,
)

__all__ = [
    "CocoAnnotation",
    "CocoCategory",
    "CocoDataset",
    "CocoImage",
    "DetectionRecord",
    "GroundTruthBox",
    "ClassResult",
    "EvalConfig",
    "EvalReport",
    "MatchOutcome",
    "PRPoint",
    "RankedOutcome",
    "average_precision",
    "evaluate",
    "evaluate_files",
    "export_pr_plot_data",
    "iou",
    "load_detections_jsonl",
    "load_ground_truth",
    "match_detections",
    "pr_curve",
]
