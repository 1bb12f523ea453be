/** Batch import: upload an instance CSV, configure replications and
 * sampling, watch progress, download the result.
 *
 * The parameter fields are read only when the CSV is (re)loaded or a job is
 * started, so users can configure everything before uploading without
 * triggering premature computation. */
import { Api, ApiError } from "../api.js";
import { downloadText, parseCsv, renderCsvTable } from "../csv.js";
import type { BatchState, SetInfo } from "../types.js";

export interface BatchInstance {
  problem: string;
  seed: number;
  dim: number;
}

export function parseInstanceCsv(text: string): { instances: BatchInstance[]; errors: string[] } {
  const rows = parseCsv(text.trim());
  const errors: string[] = [];
  const instances: BatchInstance[] = [];
  if (rows.length === 0) {
    return { instances, errors: ["file is empty"] };
  }
  const header = rows[0].map((c) => c.trim().toLowerCase());
  const dimOnly = header.length === 1 && header[0] === "dim";
  if (!dimOnly && header.join(",") !== "problem,seed,dim") {
    return { instances, errors: ["header must be 'problem,seed,dim' or 'dim'"] };
  }
  rows.slice(1).forEach((row, i) => {
    const rowNo = i + 2;
    if (dimOnly) {
      const dim = parseInt(row[0], 10);
      if (Number.isNaN(dim)) errors.push(`row ${rowNo}: missing dim`);
      else instances.push({ problem: "gallagher101", seed: 0, dim });
      return;
    }
    if (row.length !== 3) {
      errors.push(`row ${rowNo}: expected 3 fields`);
      return;
    }
    const seed = parseInt(row[1], 10);
    const dim = parseInt(row[2], 10);
    if (row[0].trim() === "") errors.push(`row ${rowNo}: missing problem`);
    else if (Number.isNaN(seed)) errors.push(`row ${rowNo}: missing seed`);
    else if (Number.isNaN(dim)) errors.push(`row ${rowNo}: missing dim`);
    else instances.push({ problem: row[0].trim(), seed, dim });
  });
  return { instances, errors };
}

export class BatchView {
  private resultCsv: string | null = null;
  private pollTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(private root: HTMLElement, private api: Api, private sets: SetInfo[],
              private pollMs = 500) {
    this.renderSkeleton();
  }

  private el<T extends HTMLElement>(selector: string): T {
    return this.root.querySelector(selector) as T;
  }

  private renderSkeleton(): void {
    const setOptions = this.sets
      .map((s) => `<option value="${s.id}"${s.id === "cm_angle" ? " selected" : ""}>${s.id}</option>`)
      .join("");
    this.root.innerHTML = `
      <div class="batch-layout">
        <aside class="config-panel">
          <h3>Batch import</h3>
          <label>replications <input name="reps" type="number" value="3" min="1"/></label>
          <label>feature set
            <select name="sets">${setOptions}<option value="all">all features</option></select>
          </label>
          <label>sample size <input name="n" type="number" value="400"/></label>
          <label>sample type
            <select name="sample"><option>uniform</option><option>lhs</option></select>
          </label>
          <label>blocks per dim <input name="blocks" type="number" value="4"/></label>
          <label>lower <input name="lower" type="number" value="-5"/></label>
          <label>upper <input name="upper" type="number" value="5"/></label>
          <label>master seed <input name="seed" type="number" value="1"/></label>
          <label>instance CSV (problem,seed,dim or dim)
            <textarea name="instances" data-testid="instances-input"></textarea>
          </label>
          <button class="start-btn" data-testid="start-btn">Start</button>
          <ul class="row-errors" data-testid="row-errors"></ul>
        </aside>
        <section class="output-pane">
          <div class="progress-wrap">
            <progress class="batch-progress" data-testid="batch-progress" value="0" max="1"></progress>
            <span class="batch-status" data-testid="batch-status">idle</span>
          </div>
          <div class="batch-result" data-testid="batch-result"></div>
          <button class="download-btn" data-testid="batch-download" disabled>Download</button>
        </section>
      </div>`;
    this.el(".start-btn").addEventListener("click", () => void this.start());
    this.el("textarea[name=instances]").addEventListener("input", () => this.validate());
    this.el(".download-btn").addEventListener("click", () => {
      if (this.resultCsv !== null) {
        downloadText("batch_features.csv", this.resultCsv, this.root.ownerDocument);
      }
    });
  }

  private validate(): BatchInstance[] {
    const text = this.el<HTMLTextAreaElement>("textarea[name=instances]").value;
    const { instances, errors } = parseInstanceCsv(text);
    this.el(".row-errors").innerHTML =
      errors.map((e) => `<li class="inline-error">${e}</li>`).join("");
    return instances;
  }

  async start(): Promise<void> {
    const instances = this.validate();
    const status = this.el(".batch-status");
    if (instances.length === 0) {
      status.textContent = "no valid instances";
      return;
    }
    const get = (name: string) => this.el<HTMLInputElement>(`[name=${name}]`).value;
    const dim = instances[0].dim;
    const blocks = parseInt(get("blocks"), 10);
    const body = {
      instances,
      reps: parseInt(get("reps"), 10) || 1,
      sets: get("sets"),
      sampling: {
        n: parseInt(get("n"), 10) || 400,
        method: get("sample"),
        blocks: blocks >= 1 ? Array(dim).fill(blocks) : null,
        lower: Array(dim).fill(parseFloat(get("lower"))),
        upper: Array(dim).fill(parseFloat(get("upper"))),
      },
      seed: parseInt(get("seed"), 10) || 0,
    };
    status.textContent = "submitting";
    try {
      const { job_id } = await this.api.submitBatch(body);
      await this.poll(job_id);
    } catch (err) {
      status.textContent = err instanceof ApiError ? err.message : String(err);
    }
  }

  private async poll(jobId: string): Promise<void> {
    const status = this.el(".batch-status");
    const bar = this.el<HTMLProgressElement>(".batch-progress");
    const state: BatchState = await this.api.batchStatus(jobId);
    bar.value = state.progress;
    status.textContent = state.status;
    if (state.status === "done" && state.result_csv !== undefined) {
      this.resultCsv = state.result_csv;
      this.el(".batch-result").innerHTML = renderCsvTable(state.result_csv);
      this.el<HTMLButtonElement>(".download-btn").disabled = false;
      return;
    }
    if (state.status === "failed") {
      status.textContent = `failed: ${state.error ?? "unknown"}`;
      return;
    }
    await new Promise<void>((resolve) => {
      this.pollTimer = setTimeout(resolve, this.pollMs);
    });
    await this.poll(jobId);
  }

  dispose(): void {
    if (this.pollTimer !== null) clearTimeout(this.pollTimer);
  }
}
