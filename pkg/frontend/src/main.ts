// App bootstrap: three tabs over the JSON API. All state lives on the
// server; the API base URL and token come from query parameters so a
// reload rebuilds every view from scratch.

import { ApiClient } from "./api";
import { AlertInbox } from "./alerts";
import { ReviewPanel } from "./review";
import { StatsPanel } from "./stats";

function currentConfig(): { baseUrl: string; token?: string } {
  const params = new URLSearchParams(window.location.search);
  return {
    baseUrl: params.get("api") ?? "http://127.0.0.1:8777",
    token: params.get("token") ?? undefined,
  };
}

export function mountApp(root: HTMLElement): void {
  const { baseUrl, token } = currentConfig();
  const api = new ApiClient({ baseUrl, token });

  root.innerHTML = `
    <header>
      <h1>wildtrap review</h1>
      <nav>
        <button data-tab="alerts" class="active">alerts</button>
        <button data-tab="review">review</button>
        <button data-tab="stats">stats</button>
      </nav>
      <span class="muted">api: ${baseUrl}</span>
    </header>
    <main>
      <section data-panel="alerts"></section>
      <section data-panel="review" hidden></section>
      <section data-panel="stats" hidden></section>
    </main>
  `;

  const inbox = new AlertInbox(api, root.querySelector("[data-panel=alerts]")!);
  const review = new ReviewPanel(api, root.querySelector("[data-panel=review]")!);
  const stats = new StatsPanel(api, root.querySelector("[data-panel=stats]")!);

  const refreshers: Record<string, () => void> = {
    alerts: () => void inbox.refresh(),
    review: () => void review.refresh(),
    stats: () => void stats.refresh(),
  };

  for (const button of root.querySelectorAll<HTMLButtonElement>("[data-tab]")) {
    button.addEventListener("click", () => {
      for (const other of root.querySelectorAll<HTMLButtonElement>("[data-tab]")) {
        other.classList.toggle("active", other === button);
      }
      for (const panel of root.querySelectorAll<HTMLElement>("[data-panel]")) {
        panel.hidden = panel.dataset.panel !== button.dataset.tab;
      }
      refreshers[button.dataset.tab!]();
    });
  }
  refreshers.alerts();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mountApp(document.getElementById("app")!);
}
