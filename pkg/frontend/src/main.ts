/** Application shell: top mode bar with the three views. */
import { Api } from "./api.js";
import { BatchView } from "./views/batch.js";
import { ImportanceView } from "./views/importance.js";
import { SingleView } from "./views/single.js";

const MODES = [
  { id: "single", label: "Single Function Analysis" },
  { id: "batch", label: "Batch Import" },
  { id: "importance", label: "Feature Importance" },
] as const;

export async function startApp(root: HTMLElement, api: Api = new Api()): Promise<void> {
  root.innerHTML = `
    <header class="topbar">
      <span class="brand">lkit</span>
      ${MODES.map((m, i) =>
        `<button class="mode${i === 0 ? " active" : ""}" data-mode="${m.id}">${m.label}</button>`)
      .join("")}
    </header>
    <main class="mode-host"></main>`;

  const host = root.querySelector(".mode-host") as HTMLElement;
  const sets = await api.listSets();

  let activeBatch: BatchView | null = null;
  const show = (mode: string) => {
    for (const btn of root.querySelectorAll(".mode")) {
      btn.classList.toggle("active", (btn as HTMLElement).dataset.mode === mode);
    }
    activeBatch?.dispose();
    activeBatch = null;
    host.innerHTML = "";
    if (mode === "single") {
      const view = new SingleView(host, api, sets);
      view.scheduleRecompute();
    } else if (mode === "batch") {
      activeBatch = new BatchView(host, api, sets);
    } else {
      new ImportanceView(host);
    }
  };

  for (const btn of root.querySelectorAll<HTMLElement>(".mode")) {
    btn.addEventListener("click", () => show(btn.dataset.mode!));
  }
  show("single");
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void startApp(document.getElementById("app") as HTMLElement);
}
