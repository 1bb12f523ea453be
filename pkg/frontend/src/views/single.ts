/** Single function analysis: configuration panel on the left, reactive
 * feature calculation and visualization tabs on the right. Any parameter
 * change debounce-triggers one recomputation. */
import { Api, ApiError, ObjectConfig } from "../api.js";
import { downloadText } from "../csv.js";
import { ReactiveRunner } from "../reactive.js";
import {
  renderBarrierTree2D,
  renderBarrierTree3D,
  renderCellMapping,
  renderFeatureTable,
  renderFunctionPlot,
  renderInfoContent,
} from "../render.js";
import type { SetInfo } from "../types.js";

const PLOT_KINDS = [
  { id: "cellmapping", label: "Cell mapping", needs2d: true },
  { id: "barriertree2d", label: "Barrier tree 2D", needs2d: true },
  { id: "barriertree3d", label: "Barrier tree 3D", needs2d: true },
  { id: "infocontent", label: "Information content", needs2d: false },
  { id: "function", label: "Function plot", needs2d: false },
] as const;

type PlotKind = (typeof PLOT_KINDS)[number]["id"];

export class SingleView {
  private runner: ReactiveRunner;
  private objectId: string | null = null;
  private currentDim = 2;
  private hasFunction = true;
  private unavailable: string[] = [];
  private outputTab: "features" | "viz" = "features";
  private selectedSet = "cm_angle";
  private selectedPlot: PlotKind = "cellmapping";
  private approach: "min" | "mean" | "near" = "min";
  private lastFeaturesCsvPath: string | null = null;

  constructor(private root: HTMLElement, private api: Api,
              private sets: SetInfo[], debounceMs?: number) {
    this.runner = new ReactiveRunner((signal) => this.recompute(signal), debounceMs);
    this.renderSkeleton();
  }

  private el<T extends HTMLElement>(selector: string): T {
    return this.root.querySelector(selector) as T;
  }

  private renderSkeleton(): void {
    const setOptions = this.sets
      .map((s) => `<option value="${s.id}"${s.id === this.selectedSet ? " selected" : ""}>${s.id}</option>`)
      .join("");
    this.root.innerHTML = `
      <div class="single-layout">
        <aside class="config-panel" data-testid="config-panel">
          <h3>Function</h3>
          <label>source
            <select name="source">
              <option value="problem" selected>named problem</option>
              <option value="expression">expression</option>
              <option value="design">design CSV</option>
            </select>
          </label>
          <label class="src-problem">problem
            <select name="problem">
              <option>gallagher101</option><option>sphere</option>
              <option>rastrigin</option><option>rosenbrock</option>
              <option>linear_slope</option>
            </select>
          </label>
          <label class="src-expression hidden">expression
            <input name="expression" placeholder="sum(x^2)"/>
          </label>
          <label class="src-design hidden">design CSV (x1,...,xd,y)
            <textarea name="design"></textarea>
          </label>
          <label>dimension <input name="dim" type="number" value="2" min="1"/></label>
          <label>seed <input name="seed" type="number" value="1"/></label>
          <label>lower bound <input name="lower" type="number" value="-5"/></label>
          <label>upper bound <input name="upper" type="number" value="5"/></label>
          <label>sample size <input name="n" type="number" value="400" min="10"/></label>
          <label>sample type
            <select name="sample"><option>uniform</option><option>lhs</option></select>
          </label>
          <label>blocks per dim <input name="blocks" type="number" value="4" min="1"/></label>
          <p class="config-error" data-testid="config-error"></p>
        </aside>
        <section class="output-pane">
          <nav class="tabs">
            <button class="tab tab-features active" data-testid="tab-features">Feature Calculation</button>
            <button class="tab tab-viz" data-testid="tab-viz">Visualization</button>
          </nav>
          <div class="features-pane">
            <label>feature set
              <select name="featureset" data-testid="set-select">
                ${setOptions}<option value="all">all features</option>
              </select>
            </label>
            <div class="feature-output" data-testid="feature-output"><p>configure a function to start</p></div>
            <button class="download-btn" data-testid="download-btn" disabled>Download</button>
          </div>
          <div class="viz-pane hidden">
            <label>plot
              <select name="plotkind" data-testid="plot-select">
                ${PLOT_KINDS.map((p) => `<option value="${p.id}">${p.label}</option>`).join("")}
              </select>
            </label>
            <label class="approach-picker">approach
              <select name="approach" data-testid="approach-select">
                <option>min</option><option>mean</option><option>near</option>
              </select>
            </label>
            <div class="viz-output" data-testid="viz-output"></div>
          </div>
        </section>
      </div>`;

    this.el("select[name=source]").addEventListener("change", () => {
      const value = this.el<HTMLSelectElement>("select[name=source]").value;
      this.el(".src-problem").classList.toggle("hidden", value !== "problem");
      this.el(".src-expression").classList.toggle("hidden", value !== "expression");
      this.el(".src-design").classList.toggle("hidden", value !== "design");
      this.runner.schedule();
    });
    for (const field of this.root.querySelectorAll<HTMLElement>(
        ".config-panel input, .config-panel textarea, .config-panel select[name=problem], .config-panel select[name=sample]")) {
      field.addEventListener("input", () => this.runner.schedule());
      field.addEventListener("change", () => this.runner.schedule());
    }
    this.el(".tab-features").addEventListener("click", () => this.switchTab("features"));
    this.el(".tab-viz").addEventListener("click", () => this.switchTab("viz"));
    this.el("select[name=featureset]").addEventListener("change", () => {
      this.selectedSet = this.el<HTMLSelectElement>("select[name=featureset]").value;
      this.refreshOutput();
    });
    this.el("select[name=plotkind]").addEventListener("change", () => {
      this.selectedPlot = this.el<HTMLSelectElement>("select[name=plotkind]").value as PlotKind;
      this.refreshOutput();
    });
    this.el("select[name=approach]").addEventListener("change", () => {
      this.approach = this.el<HTMLSelectElement>("select[name=approach]").value as
        "min" | "mean" | "near";
      this.refreshOutput();
    });
    this.el(".download-btn").addEventListener("click", () => this.download());
  }

  /** Exposed for tests and for the initial page load. */
  scheduleRecompute(): void {
    this.runner.schedule();
  }

  private readConfig(): ObjectConfig {
    const get = (name: string) =>
      this.el<HTMLInputElement>(`[name=${name}]`).value;
    const dim = parseInt(get("dim"), 10) || 2;
    const blocks = parseInt(get("blocks"), 10);
    const config: ObjectConfig = {
      dim,
      n: parseInt(get("n"), 10) || 400,
      sample: get("sample") as "uniform" | "lhs",
      seed: parseInt(get("seed"), 10) || 0,
      blocks: blocks >= 1 ? Array(dim).fill(blocks) : null,
      lower: Array(dim).fill(parseFloat(get("lower"))),
      upper: Array(dim).fill(parseFloat(get("upper"))),
    };
    const source = this.el<HTMLSelectElement>("select[name=source]").value;
    if (source === "problem") config.problem = get("problem");
    else if (source === "expression") config.expression = get("expression");
    else config.design_csv = this.el<HTMLTextAreaElement>("textarea[name=design]").value;
    return config;
  }

  private async recompute(signal: AbortSignal): Promise<void> {
    const errorEl = this.el(".config-error");
    errorEl.textContent = "";
    let config: ObjectConfig;
    try {
      config = this.readConfig();
      if (config.expression === "" || config.design_csv === "") {
        return; // wait for input
      }
      const created = await this.api.createFeatureObject(config, signal);
      this.objectId = created.id;
      this.currentDim = created.summary.dim;
      this.hasFunction = created.summary.has_function;
      this.unavailable = created.unavailable_sets;
    } catch (err) {
      if ((err as Error).name === "AbortError") return;
      errorEl.textContent = err instanceof ApiError ? err.message : String(err);
      return;
    }
    await this.refreshOutput(signal);
  }

  private switchTab(tab: "features" | "viz"): void {
    this.outputTab = tab;
    this.el(".tab-features").classList.toggle("active", tab === "features");
    this.el(".tab-viz").classList.toggle("active", tab === "viz");
    this.el(".features-pane").classList.toggle("hidden", tab !== "features");
    this.el(".viz-pane").classList.toggle("hidden", tab !== "viz");
    void this.refreshOutput();
  }

  private async refreshOutput(signal?: AbortSignal): Promise<void> {
    if (this.objectId === null) return;
    this.updatePlotAvailability();
    if (this.outputTab === "features") {
      await this.showFeatures(signal);
    } else {
      await this.showPlot(signal);
    }
  }

  private updatePlotAvailability(): void {
    const select = this.el<HTMLSelectElement>("select[name=plotkind]");
    for (const option of Array.from(select.options)) {
      const kind = PLOT_KINDS.find((p) => p.id === option.value)!;
      const blocked = kind.needs2d && this.currentDim !== 2;
      option.disabled = blocked;
      option.title = blocked ? "requires 2 dimensions" : "";
    }
    this.el(".approach-picker").classList.toggle(
      "hidden", !this.selectedPlot.startsWith("barriertree") &&
      this.selectedPlot !== "cellmapping");
  }

  private async showFeatures(signal?: AbortSignal): Promise<void> {
    const target = this.el(".feature-output");
    const button = this.el<HTMLButtonElement>(".download-btn");
    if (this.unavailable.includes(this.selectedSet)) {
      target.innerHTML = `<p class="inline-error">set unavailable for this input</p>`;
      button.disabled = true;
      return;
    }
    try {
      const resp = await this.api.getFeatures(this.objectId!, this.selectedSet, signal);
      target.innerHTML = renderFeatureTable(resp.features);
      this.lastFeaturesCsvPath = this.api.featuresCsvPath(this.objectId!, this.selectedSet);
      button.disabled = false;
    } catch (err) {
      if ((err as Error).name === "AbortError") return;
      target.innerHTML = `<p class="inline-error">${err instanceof ApiError ? err.message : err}</p>`;
      button.disabled = true;
    }
  }

  private async showPlot(signal?: AbortSignal): Promise<void> {
    const target = this.el(".viz-output");
    const kind = PLOT_KINDS.find((p) => p.id === this.selectedPlot)!;
    if (kind.needs2d && this.currentDim !== 2) {
      target.innerHTML = `<p class="inline-error">requires 2 dimensions</p>`;
      return;
    }
    try {
      let html: string;
      if (this.selectedPlot === "cellmapping") {
        html = renderCellMapping(await this.api.getPlot(this.objectId!, "cellmapping", this.approach));
      } else if (this.selectedPlot === "barriertree2d") {
        html = renderBarrierTree2D(await this.api.getPlot(this.objectId!, "barriertree2d", this.approach));
      } else if (this.selectedPlot === "barriertree3d") {
        html = renderBarrierTree3D(await this.api.getPlot(this.objectId!, "barriertree3d", this.approach));
      } else if (this.selectedPlot === "infocontent") {
        html = renderInfoContent(await this.api.getPlot(this.objectId!, "infocontent"));
      } else {
        if (!this.hasFunction) {
          target.innerHTML = `<p class="inline-error">no function attached</p>`;
          return;
        }
        html = renderFunctionPlot(await this.api.getPlot(this.objectId!, "function"));
      }
      target.innerHTML = html;
    } catch (err) {
      if ((err as Error).name === "AbortError") return;
      target.innerHTML = `<p class="inline-error">${err instanceof ApiError ? err.message : err}</p>`;
    }
  }

  private async download(): Promise<void> {
    if (this.lastFeaturesCsvPath === null) return;
    const text = await this.api.requestText(this.lastFeaturesCsvPath);
    downloadText("features.csv", text, this.root.ownerDocument);
  }
}
