"""Detection pipeline: preprocessing, pluggable detector backends, a
realtime-priority work queue, the runner, and the throughput bench."""

from .backends import (
    Detection,
    DetectRequest,
    RawDetection,
    RemoteBackend,
    SyntheticBackend,
    infer,
    synthetic_detect,
)
from .bench import ThroughputReport, bench_throughput
from .detector_server import serve_detector
from .preprocess import ModelProfile, PreprocessedImage, default_profile, preprocess
from .queue import PriorityWorkQueue, WorkItem
from .runner import PipelineResult, PipelineRunner

__all__ = [
    "Detection",
    "DetectRequest",
    "ModelProfile",
    "PipelineResult",
    "PipelineRunner",
    "PreprocessedImage",
    "PriorityWorkQueue",
    "RawDetection",
    "RemoteBackend",
    "SyntheticBackend",
    "ThroughputReport",
    "WorkItem",
    "bench_throughput",
    "default_profile",
    "infer",
    "preprocess",
    "serve_detector",
    "synthetic_detect",
]
