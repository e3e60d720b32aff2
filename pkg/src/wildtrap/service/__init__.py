"""Operational surface: one process wiring ingest, pipeline, store and alerts."""

from .config import ServiceConfig
from .platform import Platform
from .http import start_service, serve

__all__ = ["Platform", "ServiceConfig", "serve", "start_service"]
