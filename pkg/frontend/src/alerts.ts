// Alert inbox: filter by state, acknowledge in place. State badges always
// reflect the server's answer; acknowledging updates the row without a
// reload, and a repeat acknowledgment shows the server's idempotent notice.

import { ApiClient, ApiError } from "./api";
import { timeAgo } from "./format";
import type { AlertState, AlertView } from "./types";

const STATES: (AlertState | "all")[] = [
  "all",
  "pending",
  "dispatched",
  "delivered",
  "acknowledged",
  "expired",
];

export class AlertInbox {
  private container: HTMLElement;
  private actorInput!: HTMLInputElement;
  private stateSelect!: HTMLSelectElement;
  private listEl!: HTMLElement;

  constructor(
    private api: ApiClient,
    root: HTMLElement,
  ) {
    this.container = root;
    this.renderShell();
  }

  private renderShell(): void {
    this.container.innerHTML = `
      <div class="toolbar">
        <label>state
          <select data-role="state-filter">
            ${STATES.map((s) => `<option value="${s}">${s}</option>`).join("")}
          </select>
        </label>
        <label>acting as
          <input data-role="actor" placeholder="ranger name" value="ranger" />
        </label>
        <button data-role="refresh">refresh</button>
      </div>
      <div data-role="alert-list" class="list"></div>
    `;
    this.stateSelect = this.container.querySelector("[data-role=state-filter]")!;
    this.actorInput = this.container.querySelector("[data-role=actor]")!;
    this.listEl = this.container.querySelector("[data-role=alert-list]")!;
    this.stateSelect.addEventListener("change", () => void this.refresh());
    this.container
      .querySelector("[data-role=refresh]")!
      .addEventListener("click", () => void this.refresh());
  }

  async refresh(): Promise<void> {
    const state = this.stateSelect.value;
    let alerts: AlertView[];
    try {
      alerts = await this.api.listAlerts(
        state === "all" ? undefined : (state as AlertState),
      );
    } catch (err) {
      this.listEl.innerHTML = `<p class="error">failed to load alerts: ${
        err instanceof Error ? err.message : String(err)
      }</p>`;
      return;
    }
    this.listEl.innerHTML = "";
    if (alerts.length === 0) {
      this.listEl.innerHTML = `<p class="empty">no alerts</p>`;
      return;
    }
    for (const alert of alerts) {
      this.listEl.appendChild(this.renderRow(alert));
    }
  }

  private renderRow(alert: AlertView): HTMLElement {
    const row = document.createElement("div");
    row.className = "alert-row";
    row.dataset.alertId = alert.alert_id;
    const site = alert.site_name ?? alert.camera_id;
    const when = alert.capture_ts ? timeAgo(alert.capture_ts) : "";
    row.innerHTML = `
      <img class="thumb" src="${this.api.imageUrl(alert.image_sha256)}" alt="" />
      <div class="alert-main">
        <strong>${alert.label}</strong> at ${site}
        <span class="muted">${when}</span>
      </div>
      <span class="badge badge-${alert.state}" data-role="state">${alert.state}</span>
      <button data-role="ack">acknowledge</button>
      <span class="notice" data-role="notice"></span>
    `;
    const button = row.querySelector<HTMLButtonElement>("[data-role=ack]")!;
    button.addEventListener("click", () => void this.acknowledge(alert, row));
    if (alert.state === "acknowledged" || alert.state === "expired") {
      button.disabled = true;
    }
    return row;
  }

  private async acknowledge(alert: AlertView, row: HTMLElement): Promise<void> {
    const badge = row.querySelector<HTMLElement>("[data-role=state]")!;
    const notice = row.querySelector<HTMLElement>("[data-role=notice]")!;
    const actor = this.actorInput.value.trim() || "ranger";
    try {
      const updated = await this.api.acknowledgeAlert(alert.alert_id, actor);
      badge.textContent = updated.state;
      badge.className = `badge badge-${updated.state}`;
      notice.textContent = updated.idempotent
        ? `already acknowledged by ${updated.acknowledged_by ?? "someone"}`
        : `acknowledged by ${actor}`;
      notice.classList.remove("error");
      row.querySelector<HTMLButtonElement>("[data-role=ack]")!.disabled = true;
    } catch (err) {
      // e.g. acknowledging an expired alert: surface inline, keep state
      notice.textContent = err instanceof ApiError ? err.message : String(err);
      notice.classList.add("error");
    }
  }
}
