// Correction submission with queued retry: a network failure keeps the
// correction pending locally and retries with backoff until the server
// accepts it. Server-side validation errors are surfaced, not retried.

import { ApiClient, ApiError } from "./api";
import type { Correction } from "./types";

export interface PendingCorrection {
  correction: Correction;
  attempts: number;
}

type Listener = (pending: PendingCorrection[]) => void;

export class CorrectionQueue {
  private pending: PendingCorrection[] = [];
  private listeners: Listener[] = [];
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private api: ApiClient,
    private retryDelayMs = 2000,
  ) {}

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  pendingCount(): number {
    return this.pending.length;
  }

  private notify(): void {
    for (const listener of this.listeners) listener([...this.pending]);
  }

  /** Resolves true when accepted now, false when queued for retry. */
  async submit(correction: Correction): Promise<boolean> {
    try {
      await this.api.submitCorrections([correction]);
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 0) {
        this.pending.push({ correction, attempts: 1 });
        this.notify();
        this.schedule();
        return false;
      }
      throw err;
    }
  }

  private schedule(): void {
    if (this.timer !== null) return;
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.flush();
    }, this.retryDelayMs);
  }

  async flush(): Promise<void> {
    const queue = this.pending;
    this.pending = [];
    for (const item of queue) {
      try {
        await this.api.submitCorrections([item.correction]);
      } catch (err) {
        if (err instanceof ApiError && err.status === 0) {
          this.pending.push({ ...item, attempts: item.attempts + 1 });
        }
        // validation errors drop the correction; the server rejected it
      }
    }
    this.notify();
    if (this.pending.length > 0) this.schedule();
  }
}
