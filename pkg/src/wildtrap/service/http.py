"""HTTP surface of the platform.

Endpoints (JSON request/response unless noted):

    POST /v1/uploads                      manifest -> session or dedupe
    PUT  /v1/uploads/{sid}?offset=N       raw bytes -> {"resume_offset": M}
    POST /v1/uploads/{sid}/finalize       -> asset record
    GET  /v1/events?camera_id&label&from&to&min_confidence
    GET  /v1/stats
    GET  /v1/alerts?state=
    POST /v1/alerts/{id}/ack              {"actor": "..."}
    POST /v1/corrections                  JSON array or JSON lines
    GET  /v1/images/{sha256}              raw image bytes

A single shared token (Authorization: Bearer or X-Auth-Token) guards all
endpoints when configured. Responses carry permissive CORS headers so the
browser UI can run from another origin.
"""

from __future__ import annotations

import json
import logging
import signal
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from ..errors import (
    ChunkOverflowError,
    ConfigurationError,
    IncompleteUploadError,
    IntegrityError,
    OutOfOrderChunkError,
    StateMachineViolationError,
    UnknownAlertError,
    UnknownSessionError,
    ValidationError,
    WildtrapError,
)
from ..ingest.blobstore import AlreadyStored
from ..ingest.manifest import UploadManifest
from ..timeutil import parse_utc
from .config import ServiceConfig
from .platform import Platform

logger = logging.getLogger(__name__)

STATUS_BY_ERROR = (
    (OutOfOrderChunkError, 409),
    (ChunkOverflowError, 409),
    (IncompleteUploadError, 409),
    (StateMachineViolationError, 409),
    (IntegrityError, 422),
    (UnknownSessionError, 404),
    (UnknownAlertError, 404),
    (ConfigurationError, 400),
    (ValidationError, 400),
)


def _status_for(exc: WildtrapError) -> int:
    for err_type, status in STATUS_BY_ERROR:
        if isinstance(exc, err_type):
            return status
    return 500


def make_handler(platform: Platform, auth_token: str | None):
    class PlatformHandler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"
        server_version = "wildtrap/0.1"

        def log_message(self, fmt, *args):
            logger.debug("http: " + fmt, *args)

        # -- plumbing ------------------------------------------------------

        def _send(self, status: int, body: bytes, content_type: str) -> None:
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers",
                             "Authorization, Content-Type, X-Auth-Token")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS")
            self.end_headers()
            self.wfile.write(body)

        def _json(self, status: int, payload) -> None:
            self._send(status, json.dumps(payload).encode("utf-8"), "application/json")

        def _error(self, status: int, message: str, **extra) -> None:
            self._json(status, {"error": message, **extra})

        def _body(self) -> bytes:
            length = int(self.headers.get("Content-Length", "0"))
            return self.rfile.read(length) if length else b""

        def _authorized(self) -> bool:
            if auth_token is None:
                return True
            header = self.headers.get("Authorization", "")
            if header == f"Bearer {auth_token}":
                return True
            return self.headers.get("X-Auth-Token") == auth_token

        def _dispatch(self, method: str) -> None:
            if not self._authorized():
                self._error(401, "missing or invalid token")
                return
            parsed = urlparse(self.path)
            parts = [p for p in parsed.path.split("/") if p]
            query = {k: v[-1] for k, v in parse_qs(parsed.query).items()}
            try:
                handled = self._route(method, parts, query)
            except WildtrapError as exc:
                extra = {}
                if isinstance(exc, OutOfOrderChunkError):
                    extra["resume_offset"] = exc.resume_offset
                self._error(_status_for(exc), str(exc), **extra)
                return
            except json.JSONDecodeError as exc:
                self._error(400, f"invalid JSON body: {exc}")
                return
            except Exception:
                logger.exception("unhandled error for %s %s", method, self.path)
                self._error(500, "internal error")
                return
            if not handled:
                self._error(404, f"no route for {method} {parsed.path}")

        # -- routes ----------------------------------------------------------

        def _route(self, method: str, parts: list[str], query: dict) -> bool:
            if len(parts) < 2 or parts[0] != "v1":
                return False
            head = parts[1]
            if method == "GET":
                if head == "events" and len(parts) == 2:
                    return self._get_events(query)
                if head == "stats" and len(parts) == 2:
                    self._json(200, platform.events.platform_stats())
                    return True
                if head == "alerts" and len(parts) == 2:
                    state = query.get("state")
                    alerts = platform.engine.list_alerts(state)
                    self._json(200, [self._alert_view(a) for a in alerts])
                    return True
                if head == "images" and len(parts) == 3:
                    return self._get_image(parts[2])
            elif method == "POST":
                if head == "uploads" and len(parts) == 2:
                    return self._begin_upload()
                if head == "uploads" and len(parts) == 4 and parts[3] == "finalize":
                    return self._finalize(parts[2])
                if head == "alerts" and len(parts) == 4 and parts[3] == "ack":
                    return self._acknowledge(parts[2])
                if head == "corrections" and len(parts) == 2:
                    corrections = platform.parse_corrections_body(self._body())
                    accepted = platform.add_corrections(corrections)
                    self._json(200, {"accepted": accepted})
                    return True
            elif method == "PUT":
                if head == "uploads" and len(parts) == 3:
                    return self._append_chunk(parts[2], query)
            return False

        def _get_events(self, query: dict) -> bool:
            time_range = None
            lo = parse_utc(query["from"]) if "from" in query else None
            hi = parse_utc(query["to"]) if "to" in query else None
            if lo is not None or hi is not None:
                time_range = (lo, hi)
            min_confidence = (float(query["min_confidence"])
                              if "min_confidence" in query else None)
            events = platform.events.query_events(
                camera_id=query.get("camera_id"), label=query.get("label"),
                time_range=time_range, min_confidence=min_confidence)
            self._json(200, [ev.to_dict() for ev in events])
            return True

        def _get_image(self, sha256: str) -> bool:
            if not platform.blobs.has(sha256):
                self._error(404, f"no stored image {sha256}")
                return True
            data = platform.blobs.get_bytes(sha256)
            kind = "image/png" if data[:8] == b"\x89PNG\r\n\x1a\n" else "application/octet-stream"
            self._send(200, data, kind)
            return True

        def _begin_upload(self) -> bool:
            manifest = UploadManifest.from_dict(json.loads(self._body().decode("utf-8")))
            outcome = platform.blobs.begin_upload(manifest)
            if isinstance(outcome, AlreadyStored):
                self._json(200, {"deduplicated": True, "sha256": outcome.asset.sha256})
            else:
                self._json(200, {"session_id": outcome.session_id,
                                 "resume_offset": outcome.resume_offset})
            return True

        def _append_chunk(self, session_id: str, query: dict) -> bool:
            try:
                offset = int(query["offset"])
            except (KeyError, ValueError):
                raise ValidationError("offset query parameter must be an integer")
            new_offset = platform.blobs.append_chunk(session_id, offset, self._body())
            self._json(200, {"resume_offset": new_offset})
            return True

        def _finalize(self, session_id: str) -> bool:
            asset = platform.blobs.finalize_upload(session_id)
            platform.submit_asset(asset)
            self._json(200, asset.to_dict())
            return True

        def _acknowledge(self, alert_id: str) -> bool:
            body = json.loads(self._body().decode("utf-8") or "{}")
            actor = body.get("actor")
            if not actor:
                raise ValidationError("acknowledgment requires an actor")
            alert, changed = platform.engine.acknowledge(alert_id, actor)
            view = self._alert_view(alert)
            view["idempotent"] = not changed
            self._json(200, view)
            return True

        def _alert_view(self, alert) -> dict:
            view = alert.to_dict()
            camera = platform.registry.get(alert.camera_id)
            view["site_name"] = camera.site_name if camera else None
            return view

        # -- verbs -------------------------------------------------------------

        def do_GET(self):
            self._dispatch("GET")

        def do_POST(self):
            self._dispatch("POST")

        def do_PUT(self):
            self._dispatch("PUT")

        def do_OPTIONS(self):
            self._send(204, b"", "text/plain")

    return PlatformHandler


class ServiceHandle:
    def __init__(self, server: ThreadingHTTPServer, platform: Platform,
                 thread: threading.Thread):
        self.server = server
        self.platform = platform
        self.thread = thread

    @property
    def port(self) -> int:
        return self.server.server_address[1]

    @property
    def base_url(self) -> str:
        host = self.server.server_address[0]
        return f"http://{host}:{self.port}"

    def stop(self) -> None:
        self.server.shutdown()
        self.thread.join()
        self.server.server_close()
        self.platform.stop()


def start_service(config: ServiceConfig) -> ServiceHandle:
    """Start the platform and its HTTP server on a background thread."""
    platform = Platform(config)
    try:
        server = ThreadingHTTPServer((config.host, config.port),
                                     make_handler(platform, config.auth_token))
    except OSError:
        platform.stop()
        raise
    platform.start()
    thread = threading.Thread(target=server.serve_forever, name="wildtrap-http",
                              daemon=True)
    thread.start()
    logger.info("listening on %s", f"{config.host}:{server.server_address[1]}")
    return ServiceHandle(server, platform, thread)


def serve(config: ServiceConfig) -> int:
    """Blocking entry point with clean SIGTERM/SIGINT shutdown."""
    handle = start_service(config)
    done = threading.Event()

    def _shutdown(signum, frame):
        logger.info("signal %s: shutting down", signum)
        done.set()

    signal.signal(signal.SIGTERM, _shutdown)
    signal.signal(signal.SIGINT, _shutdown)
    print(f"wildtrap serving on {handle.base_url}", flush=True)
    try:
        done.wait()
    finally:
        handle.stop()
    return 0
