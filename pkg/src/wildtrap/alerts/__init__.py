"""Poaching alert rules, suppression, and the dispatch/acknowledge lifecycle."""

from .engine import Alert, AlertEngine, AlertRule, TimeWindow, Zone, load_rules
from .channels import FileChannel, MemoryChannel

__all__ = [
    "Alert",
    "AlertEngine",
    "AlertRule",
    "FileChannel",
    "MemoryChannel",
    "TimeWindow",
    "Zone",
    "load_rules",
]
