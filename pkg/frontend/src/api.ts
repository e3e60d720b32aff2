// Thin typed client over the platform's JSON API. Every mutation in the UI
// goes through exactly one of these methods.

import type {
  AlertState,
  AlertView,
  Correction,
  DetectionEvent,
  EventFilter,
  PlatformStats,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface ApiClientOptions {
  baseUrl: string;
  token?: string;
  fetchFn?: typeof fetch;
}

export class ApiClient {
  private baseUrl: string;
  private token?: string;
  private fetchFn: typeof fetch;

  constructor(options: ApiClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/+$/, "");
    this.token = options.token;
    this.fetchFn = options.fetchFn ?? fetch.bind(globalThis);
  }

  private headers(json = false): Record<string, string> {
    const headers: Record<string, string> = {};
    if (json) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    const body = await response.text();
    if (!response.ok) {
      let message = body;
      try {
        message = JSON.parse(body).error ?? body;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, message);
    }
    return JSON.parse(body) as T;
  }

  listAlerts(state?: AlertState): Promise<AlertView[]> {
    const query = state ? `?state=${encodeURIComponent(state)}` : "";
    return this.request(`/v1/alerts${query}`, { headers: this.headers() });
  }

  acknowledgeAlert(alertId: string, actor: string): Promise<AlertView> {
    return this.request(`/v1/alerts/${encodeURIComponent(alertId)}/ack`, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify({ actor }),
    });
  }

  listEvents(filter: EventFilter = {}): Promise<DetectionEvent[]> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(filter)) {
      if (value !== undefined && value !== "") params.set(key, String(value));
    }
    const query = params.toString();
    return this.request(`/v1/events${query ? `?${query}` : ""}`, {
      headers: this.headers(),
    });
  }

  stats(): Promise<PlatformStats> {
    return this.request("/v1/stats", { headers: this.headers() });
  }

  submitCorrections(corrections: Correction[]): Promise<{ accepted: number }> {
    return this.request("/v1/corrections", {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify(corrections),
    });
  }

  imageUrl(sha256: string): string {
    return `${this.baseUrl}/v1/images/${sha256}`;
  }
}
