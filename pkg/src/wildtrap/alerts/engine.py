"""Alert rule evaluation and the alert lifecycle state machine.

Rules fire on detection events by trigger label, camera zone, UTC
time-of-day window (which may wrap midnight) and confidence floor; a
suppression window keyed on (rule, camera, label) keeps a burst of frames
from flooding rangers. Alert state moves strictly along
pending -> dispatched -> delivered -> acknowledged, with pending or
dispatched alerts allowed to expire after repeated delivery failure.
Every transition is appended to a JSON Lines audit log, which is also the
replay source after a restart.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from pathlib import Path

from ..errors import (
    ConfigurationError,
    StateMachineViolationError,
    UnknownAlertError,
    ValidationError,
)
from ..store.events import DetectionEvent
from ..timeutil import format_utc, now_utc, parse_utc

STATES = ("pending", "dispatched", "delivered", "acknowledged", "expired")

# legal (from, to) edges; a failed retry re-enters "dispatched"
EDGES = {
    ("pending", "dispatched"),
    ("dispatched", "dispatched"),
    ("dispatched", "delivered"),
    ("dispatched", "acknowledged"),
    ("delivered", "acknowledged"),
    ("pending", "expired"),
    ("dispatched", "expired"),
}

DEFAULT_MAX_ATTEMPTS = 5
BACKOFF_BASE_S = 2.0
BACKOFF_CAP_S = 60.0


@dataclass(frozen=True)
class Zone:
    zone_id: str
    name: str
    restricted: bool = False


@dataclass(frozen=True)
class TimeWindow:
    """UTC time-of-day interval, start inclusive / end exclusive; wraps
    midnight when start > end. start == end matches nothing."""
    start: str  # "HH:MM"
    end: str

    def __post_init__(self):
        _parse_hhmm(self.start)
        _parse_hhmm(self.end)

    def contains(self, dt: datetime) -> bool:
        t = dt.hour * 3600 + dt.minute * 60 + dt.second
        start = _parse_hhmm(self.start)
        end = _parse_hhmm(self.end)
        if start < end:
            return start <= t < end
        if start > end:
            return t >= start or t < end
        return False

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end}


def _parse_hhmm(text: str) -> int:
    try:
        hh, mm = text.split(":")
        hour, minute = int(hh), int(mm)
    except (ValueError, AttributeError) as exc:
        raise ValidationError(f"time-of-day must be HH:MM, got {text!r}") from exc
    if not (0 <= hour <= 23 and 0 <= minute <= 59):
        raise ValidationError(f"time-of-day out of range: {text!r}")
    return hour * 3600 + minute * 60


@dataclass(frozen=True)
class AlertRule:
    rule_id: str
    trigger_labels: frozenset[str]
    zone_ids: frozenset[str] = frozenset()  # empty = all zones
    active_window: TimeWindow | None = None
    min_confidence: float = 0.0
    suppression_window_minutes: float = 0.0

    def __post_init__(self):
        if not self.trigger_labels:
            raise ValidationError(f"rule {self.rule_id}: trigger_labels must be non-empty")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValidationError(f"rule {self.rule_id}: min_confidence outside [0, 1]")
        if self.suppression_window_minutes < 0:
            raise ValidationError(f"rule {self.rule_id}: suppression window must be >= 0")

    def to_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "trigger_labels": sorted(self.trigger_labels),
            "zone_ids": sorted(self.zone_ids),
            "active_window": self.active_window.to_dict() if self.active_window else None,
            "min_confidence": self.min_confidence,
            "suppression_window_minutes": self.suppression_window_minutes,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AlertRule":
        try:
            window = data.get("active_window")
            return cls(
                rule_id=data["rule_id"],
                trigger_labels=frozenset(data["trigger_labels"]),
                zone_ids=frozenset(data.get("zone_ids") or ()),
                active_window=TimeWindow(window["start"], window["end"]) if window else None,
                min_confidence=float(data.get("min_confidence", 0.0)),
                suppression_window_minutes=float(data.get("suppression_window_minutes", 0.0)),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed alert rule {data!r}: {exc}") from exc


def load_rules(path: str | Path) -> list[AlertRule]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"unreadable rules file {path}: {exc}") from exc
    if not isinstance(data, list):
        raise ValidationError("rules file must be a JSON array")
    return [AlertRule.from_dict(entry) for entry in data]


@dataclass
class Alert:
    alert_id: str
    rule_id: str
    event_id: str
    state: str
    created_at: datetime
    state_changed_at: datetime
    attempts: int = 0
    camera_id: str = ""
    label: str = ""
    image_sha256: str = ""
    capture_ts: datetime | None = None
    acknowledged_by: str | None = None
    next_attempt_at: datetime | None = None

    def to_dict(self) -> dict:
        return {
            "alert_id": self.alert_id,
            "rule_id": self.rule_id,
            "event_id": self.event_id,
            "state": self.state,
            "created_at": format_utc(self.created_at),
            "state_changed_at": format_utc(self.state_changed_at),
            "attempts": self.attempts,
            "camera_id": self.camera_id,
            "label": self.label,
            "image_sha256": self.image_sha256,
            "capture_ts": format_utc(self.capture_ts) if self.capture_ts else None,
            "acknowledged_by": self.acknowledged_by,
            "next_attempt_at": format_utc(self.next_attempt_at) if self.next_attempt_at else None,
        }


def derive_alert_id(rule_id: str, event_id: str) -> str:
    return hashlib.sha256(f"{rule_id}:{event_id}".encode()).hexdigest()[:16]


class AlertEngine:
    def __init__(self, rules, camera_registry, audit_path: str | Path | None = None,
                 max_attempts: int = DEFAULT_MAX_ATTEMPTS,
                 backoff_base_s: float = BACKOFF_BASE_S,
                 backoff_cap_s: float = BACKOFF_CAP_S,
                 clock=now_utc):
        self.rules = list(rules)
        self.registry = dict(camera_registry)
        self.max_attempts = max_attempts
        self.backoff_base_s = backoff_base_s
        self.backoff_cap_s = backoff_cap_s
        self.clock = clock
        self._lock = threading.Lock()
        self._alerts: dict[str, Alert] = {}
        self._last_fired: dict[tuple[str, str, str], datetime] = {}
        self._audit_path = Path(audit_path) if audit_path else None
        self._audit_fh = None
        if self._audit_path is not None:
            self._audit_path.parent.mkdir(parents=True, exist_ok=True)
            if self._audit_path.exists():
                self._replay()
            self._audit_fh = open(self._audit_path, "a", encoding="utf-8")

    # -- rule evaluation -----------------------------------------------------

    def evaluate_rules(self, event: DetectionEvent, now: datetime | None = None) -> list[Alert]:
        """New pending alerts for one event; suppression state is updated."""
        camera = self.registry.get(event.camera_id)
        if camera is None:
            raise ConfigurationError(f"event camera {event.camera_id} not in registry")
        now = now or self.clock()
        created = []
        with self._lock:
            for rule in self.rules:
                if event.label not in rule.trigger_labels:
                    continue
                if rule.zone_ids and camera.zone_id not in rule.zone_ids:
                    continue
                if rule.active_window is not None \
                        and not rule.active_window.contains(event.detected_at):
                    continue
                if event.confidence < rule.min_confidence:
                    continue
                key = (rule.rule_id, event.camera_id, event.label)
                last = self._last_fired.get(key)
                if last is not None and (event.detected_at - last).total_seconds() \
                        < rule.suppression_window_minutes * 60.0:
                    continue
                alert_id = derive_alert_id(rule.rule_id, event.event_id)
                if alert_id in self._alerts:
                    continue  # replayed event; alert already exists
                alert = Alert(
                    alert_id=alert_id, rule_id=rule.rule_id, event_id=event.event_id,
                    state="pending", created_at=now, state_changed_at=now,
                    camera_id=event.camera_id, label=event.label,
                    image_sha256=event.image_sha256, capture_ts=event.detected_at)
                self._alerts[alert_id] = alert
                self._last_fired[key] = event.detected_at
                self._audit(alert, "created", None, "pending", now)
                created.append(replace(alert))
        return created

    # -- lifecycle -------------------------------------------------------------

    def dispatch(self, alert_id: str, channel, now: datetime | None = None) -> Alert:
        """One delivery attempt: ack -> delivered, failure -> backoff or expiry."""
        now = now or self.clock()
        with self._lock:
            alert = self._get(alert_id)
            if alert.state not in ("pending", "dispatched"):
                raise StateMachineViolationError(
                    f"cannot dispatch alert in state {alert.state}")
            if alert.state == "pending":
                self._transition(alert, "dispatched", now)
            alert.attempts += 1
        # channel I/O happens outside the lock; per-alert state already moved
        ok = bool(channel.send(alert))
        with self._lock:
            if ok:
                alert.next_attempt_at = None
                self._transition(alert, "delivered", now)
            elif alert.attempts >= self.max_attempts:
                alert.next_attempt_at = None
                self._transition(alert, "expired", now)
            else:
                delay = min(self.backoff_cap_s,
                            self.backoff_base_s * (2 ** (alert.attempts - 1)))
                alert.next_attempt_at = now + timedelta(seconds=delay)
                self._transition(alert, "dispatched", now)
            return replace(alert)

    def acknowledge(self, alert_id: str, actor: str,
                    now: datetime | None = None) -> tuple[Alert, bool]:
        """Returns (alert, changed); re-acknowledging is an idempotent no-op."""
        now = now or self.clock()
        with self._lock:
            alert = self._get(alert_id)
            if alert.state == "acknowledged":
                return replace(alert), False
            if alert.state not in ("dispatched", "delivered"):
                raise StateMachineViolationError(
                    f"cannot acknowledge alert in state {alert.state}")
            alert.acknowledged_by = actor
            self._transition(alert, "acknowledged", now, actor=actor)
            return replace(alert), True

    # -- queries ---------------------------------------------------------------

    def get(self, alert_id: str) -> Alert:
        with self._lock:
            return replace(self._get(alert_id))

    def list_alerts(self, state: str | None = None) -> list[Alert]:
        if state is not None and state not in STATES:
            raise ValidationError(f"unknown alert state {state!r}")
        with self._lock:
            alerts = [replace(a) for a in self._alerts.values()
                      if state is None or a.state == state]
        alerts.sort(key=lambda a: (a.created_at, a.alert_id))
        return alerts

    def due_for_dispatch(self, now: datetime | None = None) -> list[Alert]:
        now = now or self.clock()
        with self._lock:
            due = [replace(a) for a in self._alerts.values()
                   if a.state == "pending"
                   or (a.state == "dispatched"
                       and a.next_attempt_at is not None and a.next_attempt_at <= now)]
        due.sort(key=lambda a: (a.created_at, a.alert_id))
        return due

    def close(self) -> None:
        with self._lock:
            if self._audit_fh is not None:
                self._audit_fh.close()
                self._audit_fh = None

    # -- internals ---------------------------------------------------------------

    def _get(self, alert_id: str) -> Alert:
        alert = self._alerts.get(alert_id)
        if alert is None:
            raise UnknownAlertError(f"unknown alert {alert_id}")
        return alert

    def _transition(self, alert: Alert, new_state: str, now: datetime,
                    actor: str | None = None) -> None:
        if (alert.state, new_state) not in EDGES:
            raise StateMachineViolationError(
                f"illegal transition {alert.state} -> {new_state}")
        old = alert.state
        alert.state = new_state
        alert.state_changed_at = now
        self._audit(alert, "transition", old, new_state, now, actor=actor)

    def _audit(self, alert: Alert, kind: str, from_state, to_state,
               now: datetime, actor: str | None = None) -> None:
        if self._audit_fh is None:
            return
        record = {
            "kind": kind,
            "alert_id": alert.alert_id,
            "rule_id": alert.rule_id,
            "event_id": alert.event_id,
            "camera_id": alert.camera_id,
            "label": alert.label,
            "image_sha256": alert.image_sha256,
            "capture_ts": format_utc(alert.capture_ts) if alert.capture_ts else None,
            "from": from_state,
            "to": to_state,
            "attempts": alert.attempts,
            "actor": actor,
            "ts": format_utc(now),
            "next_attempt_at": (format_utc(alert.next_attempt_at)
                                if alert.next_attempt_at else None),
        }
        self._audit_fh.write(json.dumps(record, sort_keys=True) + "\n")
        self._audit_fh.flush()

    def _replay(self) -> None:
        raw = self._audit_path.read_bytes()
        lines = raw.split(b"\n")
        lines.pop()  # tail after final newline (possibly torn)
        for line in lines:
            if not line.strip():
                continue
            record = json.loads(line)
            alert_id = record["alert_id"]
            ts = parse_utc(record["ts"])
            capture_ts = parse_utc(record["capture_ts"]) if record.get("capture_ts") else None
            if record["kind"] == "created":
                alert = Alert(
                    alert_id=alert_id, rule_id=record["rule_id"],
                    event_id=record["event_id"], state="pending",
                    created_at=ts, state_changed_at=ts,
                    camera_id=record.get("camera_id", ""),
                    label=record.get("label", ""),
                    image_sha256=record.get("image_sha256", ""),
                    capture_ts=capture_ts)
                self._alerts[alert_id] = alert
                if capture_ts is not None:
                    key = (alert.rule_id, alert.camera_id, alert.label)
                    prev = self._last_fired.get(key)
                    if prev is None or capture_ts > prev:
                        self._last_fired[key] = capture_ts
            else:
                alert = self._alerts.get(alert_id)
                if alert is None:
                    continue
                alert.state = record["to"]
                alert.state_changed_at = ts
                alert.attempts = record.get("attempts", alert.attempts)
                if record.get("actor"):
                    alert.acknowledged_by = record["actor"]
                next_at = record.get("next_attempt_at")
                alert.next_attempt_at = parse_utc(next_at) if next_at else None
