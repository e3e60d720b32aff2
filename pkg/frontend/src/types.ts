// Wire types mirroring the platform's JSON API.

export type AlertState =
  | "pending"
  | "dispatched"
  | "delivered"
  | "acknowledged"
  | "expired";

export interface AlertView {
  alert_id: string;
  rule_id: string;
  event_id: string;
  state: AlertState;
  created_at: string;
  state_changed_at: string;
  attempts: number;
  camera_id: string;
  label: string;
  image_sha256: string;
  capture_ts: string | null;
  acknowledged_by: string | null;
  next_attempt_at: string | null;
  site_name: string | null;
  idempotent?: boolean;
}

export interface DetectionEvent {
  event_id: string;
  image_sha256: string;
  camera_id: string;
  model_id: string;
  label: string;
  confidence: number;
  bbox: [number, number, number, number]; // x_min, y_min, x_max, y_max
  detected_at: string;
  pipeline_mode: "realtime" | "batch";
}

export interface PlatformStats {
  images_processed: number;
  detection_events: number;
  observations: number;
  distinct_labels: number;
}

export type Verdict = "confirm" | "relabel" | "reject";

export interface Correction {
  event_id: string;
  verdict: Verdict;
  actor: string;
  ts: string;
  corrected_label?: string | null;
  corrected_bbox?: [number, number, number, number] | null;
}

export interface EventFilter {
  camera_id?: string;
  label?: string;
  from?: string;
  to?: string;
  min_confidence?: number;
}
