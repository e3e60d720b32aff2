"""Stand-alone detector service speaking the detect wire protocol.

POST /v1/detect with ``{"model_id", "image_b64", "min_confidence"}``
returns ``{"model_id", "detections": [...], "latency_ms"}`` with boxes in
resized-image coordinates. Wrapping an in-process backend behind this
endpoint is how a trained model would slot into the pipeline.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..errors import DecodeError, WildtrapError
from .backends import DetectRequest
from .preprocess import ModelProfile, preprocess

logger = logging.getLogger(__name__)


def _make_handler(backend, profile: ModelProfile):
    class DetectorHandler(BaseHTTPRequestHandler):
        server_version = "wildtrap-detector/0.1"

        def log_message(self, fmt, *args):
            logger.debug("detector: " + fmt, *args)

        def _reply(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self):
            if self.path != "/v1/detect":
                self._reply(404, {"error": "unknown endpoint"})
                return
            started = time.perf_counter()
            try:
                length = int(self.headers.get("Content-Length", "0"))
                request = json.loads(self.rfile.read(length).decode("utf-8"))
                image = base64.b64decode(request["image_b64"])
                min_confidence = float(request.get("min_confidence", 0.0))
                pre = preprocess(image, profile,
                                 source_sha256=hashlib.sha256(image).hexdigest())
                raw = backend.detect(DetectRequest(
                    pre=pre, profile=profile, min_confidence=min_confidence,
                    image_bytes=image))
                detections = [
                    {"label": r.label, "confidence": r.confidence, "bbox": r.bbox.as_list()}
                    for r in raw if r.confidence >= min_confidence
                ]
                self._reply(200, {
                    "model_id": request.get("model_id", getattr(backend, "model_id", "")),
                    "detections": detections,
                    "latency_ms": (time.perf_counter() - started) * 1000.0,
                })
            except (KeyError, ValueError, json.JSONDecodeError) as exc:
                self._reply(400, {"error": f"bad request: {exc}"})
            except DecodeError as exc:
                self._reply(422, {"error": str(exc)})
            except WildtrapError as exc:
                self._reply(500, {"error": str(exc)})

    return DetectorHandler


def serve_detector(backend, profile: ModelProfile, host: str = "127.0.0.1",
                   port: int = 0):
    """Start the detector service on a background thread.

    Returns (server, thread); call ``server.shutdown()`` to stop. Port 0
    picks a free port, available as ``server.server_address[1]``.
    """
    server = ThreadingHTTPServer((host, port), _make_handler(backend, profile))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, thread
