/** Typed client for the feature service. All numbers displayed anywhere in
 * the UI come out of these responses; the UI never computes feature values
 * itself. */
import type {
  BarrierTreePlot,
  BatchState,
  CellMappingPlot,
  FeatureObjectResponse,
  FeaturesResponse,
  FunctionPlot,
  InfoContentPlot,
  ProblemInfo,
  SetInfo,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export interface ObjectConfig {
  problem?: string;
  expression?: string;
  design_csv?: string;
  dim: number;
  n: number;
  sample: "uniform" | "lhs";
  seed: number;
  blocks?: number[] | null;
  lower?: number[] | null;
  upper?: number[] | null;
}

export class Api {
  constructor(private fetchFn: FetchLike = (input, init) => fetch(input, init),
              private base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let detail = `${resp.status}`;
      try {
        const body = await resp.json();
        detail = body.detail ?? JSON.stringify(body);
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(resp.status, detail);
    }
    return resp.json() as Promise<T>;
  }

  async requestText(path: string): Promise<string> {
    const resp = await this.fetchFn(this.base + path);
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return resp.text();
  }

  listSets(): Promise<SetInfo[]> {
    return this.request("/api/sets");
  }

  listProblems(): Promise<ProblemInfo[]> {
    return this.request("/api/problems");
  }

  createFeatureObject(config: ObjectConfig, signal?: AbortSignal): Promise<FeatureObjectResponse> {
    return this.request("/api/feature-object", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(config),
      signal,
    });
  }

  getFeatures(id: string, sets: string, signal?: AbortSignal): Promise<FeaturesResponse> {
    return this.request(
      `/api/feature-object/${id}/features?sets=${encodeURIComponent(sets)}`,
      { signal });
  }

  featuresCsvPath(id: string, sets: string): string {
    return `/api/feature-object/${id}/features.csv?sets=${encodeURIComponent(sets)}`;
  }

  getPlot(id: string, kind: "cellmapping", approach: string): Promise<CellMappingPlot>;
  getPlot(id: string, kind: "barriertree2d" | "barriertree3d", approach: string): Promise<BarrierTreePlot>;
  getPlot(id: string, kind: "infocontent"): Promise<InfoContentPlot>;
  getPlot(id: string, kind: "function"): Promise<FunctionPlot>;
  getPlot(id: string, kind: string, approach?: string): Promise<unknown> {
    const suffix = approach ? `?approach=${approach}` : "";
    return this.request(`/api/feature-object/${id}/plot/${kind}${suffix}`);
  }

  submitBatch(body: unknown): Promise<{ job_id: string }> {
    return this.request("/api/batch", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  batchStatus(jobId: string): Promise<BatchState> {
    return this.request(`/api/batch/${jobId}`);
  }
}
