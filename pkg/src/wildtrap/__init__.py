"""Wildtrap: a camera-trap processing platform.

Field stations upload imagery over lossy links into a content-addressed
store; a priority-scheduled pipeline runs detector backends over the
images, persists detection events, raises poaching alerts, and the
detector output can be scored against ground truth (per-class AP and
mAP@0.5).
"""

__version__ = "0.1.0"
