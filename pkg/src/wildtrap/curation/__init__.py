"""Offline dataset preparation: rigid augmentation and corrected exports."""

from .augment import AugmentSpec, AugmentVariant, augment
from .corrections import Correction, load_corrections, parse_correction
from .export import export_training_manifest

__all__ = [
    "AugmentSpec",
    "AugmentVariant",
    "Correction",
    "augment",
    "export_training_manifest",
    "load_corrections",
    "parse_correction",
]
