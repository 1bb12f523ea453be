/** Feature importance: paste or upload per-fold selected feature names and
 * see the dot-matrix plot; importance threshold is selection in at least 80%
 * of the folds. */
import { renderImportance } from "../render.js";
import type { ImportancePlot } from "../types.js";

export function foldsFromText(text: string): string[][] {
  const trimmed = text.trim();
  if (!trimmed) return [];
  if (trimmed.startsWith("[")) {
    const parsed = JSON.parse(trimmed) as string[][];
    return parsed.map((fold) => fold.map(String));
  }
  // CSV fallback: one fold per line, comma-separated feature names
  return trimmed.split(/\r?\n/).map((line) =>
    line.split(",").map((c) => c.trim()).filter((c) => c.length > 0));
}

export function buildImportance(folds: string[][], threshold = 0.8): ImportancePlot {
  const names = Array.from(new Set(folds.flat())).sort();
  const frequency = names.map(
    (name) => folds.filter((fold) => fold.includes(name)).length / folds.length);
  const order = names
    .map((name, i) => ({ name, freq: frequency[i] }))
    .sort((a, b) => (b.freq - a.freq) || a.name.localeCompare(b.name));
  return {
    schema_version: 1,
    kind: "featureimportance",
    threshold,
    features: order.map((o) => o.name),
    frequency: order.map((o) => o.freq),
    important: order.map((o) => o.freq >= threshold),
    matrix: folds.map((fold) => order.map((o) => fold.includes(o.name))),
    n_folds: folds.length,
  };
}

export class ImportanceView {
  constructor(private root: HTMLElement) {
    this.root.innerHTML = `
      <div class="importance-layout">
        <aside class="config-panel">
          <h3>Feature importance</h3>
          <label>per-fold selections (JSON array of arrays, or one CSV line per fold)
            <textarea name="folds" data-testid="folds-input"
              placeholder='[["gcm.min.attractors","ic.h_max"], ...]'></textarea>
          </label>
          <button class="render-btn" data-testid="render-btn">Render</button>
          <p class="inline-error" data-testid="folds-error"></p>
        </aside>
        <section class="output-pane">
          <div class="importance-output" data-testid="importance-output">
            <p>paste fold selections to start</p>
          </div>
        </section>
      </div>`;
    this.root.querySelector(".render-btn")!.addEventListener("click", () => this.render());
  }

  render(): void {
    const errorEl = this.root.querySelector("[data-testid=folds-error]") as HTMLElement;
    const output = this.root.querySelector(".importance-output") as HTMLElement;
    errorEl.textContent = "";
    const text = (this.root.querySelector("textarea[name=folds]") as HTMLTextAreaElement).value;
    let folds: string[][];
    try {
      folds = foldsFromText(text);
    } catch (err) {
      errorEl.textContent = `cannot parse fold list: ${err}`;
      return;
    }
    if (folds.length === 0) {
      errorEl.textContent = "provide at least one fold";
      return;
    }
    output.innerHTML = renderImportance(buildImportance(folds));
  }
}
