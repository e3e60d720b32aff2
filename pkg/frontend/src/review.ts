// Detection review: pick an event, see its box overlaid on the image at
// the current display scale, file a confirm / relabel / reject verdict.
// Corrections that cannot reach the server stay visibly pending and retry.

import { ApiClient } from "./api";
import { CorrectionQueue } from "./corrections";
import { confidencePct, overlayRect } from "./format";
import type { Correction, DetectionEvent, Verdict } from "./types";

export const DISPLAY_WIDTH = 480;

export class ReviewPanel {
  private listEl!: HTMLElement;
  private detailEl!: HTMLElement;
  private pendingEl!: HTMLElement;
  private labelInput!: HTMLInputElement;
  private events: DetectionEvent[] = [];
  private queue: CorrectionQueue;

  constructor(
    private api: ApiClient,
    root: HTMLElement,
    queue?: CorrectionQueue,
  ) {
    this.queue = queue ?? new CorrectionQueue(api);
    root.innerHTML = `
      <div class="toolbar">
        <label>label
          <input data-role="label-filter" placeholder="e.g. human" />
        </label>
        <button data-role="load">load events</button>
        <span class="notice" data-role="pending"></span>
      </div>
      <div class="review-split">
        <div data-role="event-list" class="list"></div>
        <div data-role="detail" class="detail"></div>
      </div>
    `;
    this.listEl = root.querySelector("[data-role=event-list]")!;
    this.detailEl = root.querySelector("[data-role=detail]")!;
    this.pendingEl = root.querySelector("[data-role=pending]")!;
    this.labelInput = root.querySelector("[data-role=label-filter]")!;
    root
      .querySelector("[data-role=load]")!
      .addEventListener("click", () => void this.refresh());
    this.queue.onChange((pending) => {
      this.pendingEl.textContent = pending.length
        ? `${pending.length} correction(s) pending retry`
        : "";
    });
  }

  async refresh(): Promise<void> {
    const label = this.labelInput.value.trim();
    this.events = await this.api.listEvents(label ? { label } : {});
    this.listEl.innerHTML = "";
    for (const event of this.events) {
      const row = document.createElement("div");
      row.className = "event-row";
      row.dataset.eventId = event.event_id;
      row.innerHTML = `<strong>${event.label}</strong> ${confidencePct(
        event.confidence,
      )} <span class="muted">${event.camera_id} · ${event.detected_at}</span>`;
      row.addEventListener("click", () => this.select(event));
      this.listEl.appendChild(row);
    }
  }

  select(event: DetectionEvent): void {
    this.detailEl.innerHTML = `
      <div class="frame" data-role="frame" style="position:relative">
        <img data-role="photo" src="${this.api.imageUrl(event.image_sha256)}"
             style="width:${DISPLAY_WIDTH}px;display:block" alt="" />
        <div data-role="overlay" class="overlay"
             style="position:absolute;border:2px solid #ff4d4d"></div>
      </div>
      <p><strong>${event.label}</strong> ${confidencePct(event.confidence)}
         from ${event.camera_id} (${event.pipeline_mode})</p>
      <div class="verdicts">
        <label>actor <input data-role="actor" value="reviewer" /></label>
        <button data-role="confirm">confirm</button>
        <input data-role="new-label" placeholder="new label" />
        <button data-role="relabel">relabel</button>
        <button data-role="reject">reject</button>
        <span class="notice" data-role="verdict-notice"></span>
      </div>
    `;
    const photo = this.detailEl.querySelector<HTMLImageElement>("[data-role=photo]")!;
    const overlay = this.detailEl.querySelector<HTMLElement>("[data-role=overlay]")!;
    const position = () => {
      const natural = photo.naturalWidth || DISPLAY_WIDTH;
      this.positionOverlay(overlay, event.bbox, DISPLAY_WIDTH / natural);
    };
    if (photo.complete) position();
    photo.addEventListener("load", position);

    const notice = this.detailEl.querySelector<HTMLElement>("[data-role=verdict-notice]")!;
    const actorInput = this.detailEl.querySelector<HTMLInputElement>("[data-role=actor]")!;
    const newLabel = this.detailEl.querySelector<HTMLInputElement>("[data-role=new-label]")!;
    const file = (verdict: Verdict) => {
      const correction: Correction = {
        event_id: event.event_id,
        verdict,
        actor: actorInput.value.trim() || "reviewer",
        ts: new Date().toISOString(),
      };
      if (verdict === "relabel") {
        const label = newLabel.value.trim();
        if (!label) {
          notice.textContent = "relabel needs a new label";
          notice.classList.add("error");
          return;
        }
        correction.corrected_label = label;
      }
      void this.submit(correction, notice);
    };
    this.detailEl
      .querySelector("[data-role=confirm]")!
      .addEventListener("click", () => file("confirm"));
    this.detailEl
      .querySelector("[data-role=relabel]")!
      .addEventListener("click", () => file("relabel"));
    this.detailEl
      .querySelector("[data-role=reject]")!
      .addEventListener("click", () => file("reject"));
  }

  positionOverlay(
    overlay: HTMLElement,
    bbox: [number, number, number, number],
    scale: number,
  ): void {
    const rect = overlayRect(bbox, scale);
    overlay.style.left = `${rect.left}px`;
    overlay.style.top = `${rect.top}px`;
    overlay.style.width = `${rect.width}px`;
    overlay.style.height = `${rect.height}px`;
  }

  private async submit(correction: Correction, notice: HTMLElement): Promise<void> {
    try {
      const accepted = await this.queue.submit(correction);
      notice.textContent = accepted
        ? `${correction.verdict} recorded`
        : `${correction.verdict} pending (will retry)`;
      notice.classList.toggle("error", false);
      notice.classList.toggle("pending", !accepted);
    } catch (err) {
      notice.textContent = err instanceof Error ? err.message : String(err);
      notice.classList.add("error");
    }
  }
}
