"""End-to-end platform: finalized uploads flow through the detection
pipeline into the event store, new events are checked against the alert
rules, and due alerts are dispatched on a background loop."""

from __future__ import annotations

import json
import logging
import threading

from ..alerts.channels import FileChannel
from ..alerts.engine import AlertEngine, load_rules
from ..curation.corrections import Correction, parse_correction
from ..errors import ConfigurationError, ValidationError
from ..ingest.blobstore import BlobStore, ImageAsset
from ..ingest.cameras import load_camera_registry
from ..pipeline.backends import RemoteBackend, SyntheticBackend
from ..pipeline.runner import PipelineRunner
from ..store.events import EventStore
from .config import ServiceConfig

logger = logging.getLogger(__name__)


class Platform:
    def __init__(self, config: ServiceConfig):
        self.config = config
        root = config.store_root
        root.mkdir(parents=True, exist_ok=True)
        self.blobs = BlobStore(root)
        self.events = EventStore(root / "events")
        self.registry = (load_camera_registry(config.camera_registry_file)
                         if config.camera_registry_file else {})
        rules = load_rules(config.rules_file) if config.rules_file else []
        self.engine = AlertEngine(rules, self.registry,
                                  audit_path=root / "alerts" / "audit.jsonl")
        self.channel = FileChannel(root / "alerts" / "dispatched.jsonl")
        self.corrections_path = root / "corrections.jsonl"
        self.profile = config.profile
        self.backend = self._build_backend(config)
        self.runner = PipelineRunner(
            self.blobs, self.events, self.backend, self.profile,
            concurrency=config.concurrency, retry_limit=config.retry_limit,
            retry_backoff_s=0.05, on_event=self._on_new_event)
        self._corrections_lock = threading.Lock()
        self._stop = threading.Event()
        self._dispatcher: threading.Thread | None = None

    def _build_backend(self, config: ServiceConfig):
        backend = config.backend
        mode = backend.get("mode")
        if mode == "remote":
            return RemoteBackend(url=backend["url"], model_id=self.profile.model_id)
        if mode == "fixed":
            return SyntheticBackend(store=self.blobs, model_id=self.profile.model_id,
                                    fixed=[])
        return SyntheticBackend(
            store=self.blobs, model_id=self.profile.model_id,
            jitter_px=float(backend.get("jitter_px", 0.0)),
            seed=int(backend.get("seed", 0)),
            latency_ms=float(backend.get("latency_ms", 0.0)))

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        self.runner.start()
        self.reconcile()
        self._dispatcher = threading.Thread(target=self._dispatch_loop,
                                            name="alert-dispatcher", daemon=True)
        self._dispatcher.start()

    def stop(self) -> None:
        self._stop.set()
        if self._dispatcher is not None:
            self._dispatcher.join()
        self.runner.stop()
        self.events.close()
        self.engine.close()
        logger.info("platform stopped; logs flushed")

    def reconcile(self) -> int:
        """Enqueue finalized assets that never reached a terminal outcome."""
        submitted = 0
        for asset in self.blobs.iter_assets():
            if not self.events.has_terminal_outcome(asset.sha256):
                self.submit_asset(asset)
                submitted += 1
        if submitted:
            logger.info("reconciled %d unprocessed assets", submitted)
        return submitted

    # -- pipeline glue ---------------------------------------------------------

    def priority_for(self, camera_id: str) -> str:
        camera = self.registry.get(camera_id)
        return "realtime" if camera is not None and camera.realtime else "batch"

    def submit_asset(self, asset: ImageAsset) -> None:
        self.runner.submit_asset(asset, self.priority_for(asset.manifest.camera_id))

    def _on_new_event(self, event) -> None:
        try:
            created = self.engine.evaluate_rules(event)
        except ConfigurationError:
            logger.debug("no registry entry for camera %s; skipping alert rules",
                         event.camera_id)
            return
        for alert in created:
            logger.info("alert %s (%s on %s) pending", alert.alert_id,
                        alert.label, alert.camera_id)

    def _dispatch_loop(self) -> None:
        while not self._stop.wait(self.config.dispatch_interval_s):
            for alert in self.engine.due_for_dispatch():
                try:
                    self.engine.dispatch(alert.alert_id, self.channel)
                except Exception:
                    logger.exception("dispatch of %s failed", alert.alert_id)

    # -- corrections intake ------------------------------------------------------

    def add_corrections(self, corrections: list[Correction]) -> int:
        for correction in corrections:
            if self.events.get_event(correction.event_id) is None:
                raise ValidationError(
                    f"correction references unknown event {correction.event_id}")
        with self._corrections_lock:
            with open(self.corrections_path, "a", encoding="utf-8") as fh:
                for correction in corrections:
                    fh.write(json.dumps(correction.to_dict(), sort_keys=True) + "\n")
        return len(corrections)

    def parse_corrections_body(self, body: bytes) -> list[Correction]:
        """Accepts a JSON array or JSON Lines."""
        text = body.decode("utf-8").strip()
        if not text:
            return []
        if text.startswith("["):
            data = json.loads(text)
            if not isinstance(data, list):
                raise ValidationError("corrections payload must be an array or JSON lines")
            return [parse_correction(entry) for entry in data]
        return [parse_correction(json.loads(line))
                for line in text.splitlines() if line.strip()]
