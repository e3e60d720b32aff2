// Platform statistics, rendered verbatim from /v1/stats.

import { ApiClient } from "./api";

export class StatsPanel {
  constructor(
    private api: ApiClient,
    private root: HTMLElement,
  ) {}

  async refresh(): Promise<void> {
    try {
      const stats = await this.api.stats();
      this.root.innerHTML = `
        <dl class="stats">
          <dt>images processed</dt><dd>${stats.images_processed}</dd>
          <dt>detection events</dt><dd>${stats.detection_events}</dd>
          <dt>observations</dt><dd>${stats.observations}</dd>
          <dt>distinct labels</dt><dd>${stats.distinct_labels}</dd>
        </dl>`;
    } catch (err) {
      this.root.innerHTML = `<p class="error">stats unavailable: ${
        err instanceof Error ? err.message : String(err)
      }</p>`;
    }
  }
}
