/** Payload shapes of the feature service API. */

export type FeatureValue = number | null;

export interface ObjectSummary {
  name?: string;
  n_obs: number;
  dim: number;
  lower: number[];
  upper: number[];
  minimize: boolean;
  has_function: boolean;
  blocks: number[] | null;
  cells: { total: number; filled: number; empty: number; widths: number[] } | null;
}

export interface FeatureObjectResponse {
  id: string;
  summary: ObjectSummary;
  unavailable_sets: string[];
}

export interface FeaturesResponse {
  id: string;
  sets: string;
  seed: number;
  features: Record<string, FeatureValue>;
}

export interface SetInfo {
  id: string;
  size: number;
  requires_function: boolean;
  requires_blocks: boolean;
  stochastic: boolean;
}

export interface ProblemInfo {
  name: string;
  any_dim: boolean;
  needs_seed: boolean;
}

export interface CellMappingArrow {
  target_cell: number;
  direction: number[];
  length: number;
}

export interface CellMappingCell {
  cell: number;
  coords: number[];
  center: number[];
  class: "attractor" | "uncertain" | "certain";
  basin: number | null;
  representative: number;
  arrows: CellMappingArrow[];
}

export interface CellMappingPlot {
  schema_version: number;
  kind: "cellmapping";
  approach: string;
  blocks: number[];
  lower: number[];
  upper: number[];
  cell_widths: number[];
  cells: CellMappingCell[];
}

export interface TreeNode {
  id: number;
  cell: number;
  role: "leaf" | "saddle";
  height: number;
  coords: number[];
  level: number;
}

export interface BarrierTreePlot {
  schema_version: number;
  kind: string;
  approach: string;
  mode: "2d" | "3d";
  nodes: TreeNode[];
  edges: { parent: number; child: number }[];
  root_marker: { id: number; cell: number; height: number; coords: number[] };
  surface?: { x: number[]; y: number[]; z: (number | null)[][] };
}

export interface InfoContentMarker {
  eps: number;
  value: number;
  series: "h" | "m";
}

export interface InfoContentPlot {
  schema_version: number;
  kind: "infocontent";
  eps: number[];
  h: number[];
  m: number[];
  markers: {
    m0: InfoContentMarker | null;
    h_max: InfoContentMarker | null;
    eps_s: InfoContentMarker | null;
    eps_ratio: InfoContentMarker | null;
  };
}

export interface FunctionPlot {
  schema_version: number;
  kind: "function1d" | "function2d";
  x: number[];
  y?: number[];
  values?: number[];
  z?: number[][];
}

export interface BatchState {
  job_id: string;
  status: "queued" | "running" | "done" | "failed";
  progress: number;
  result_csv?: string;
  error?: string;
}

export interface ImportancePlot {
  schema_version: number;
  kind: "featureimportance";
  threshold: number;
  features: string[];
  frequency: number[];
  important: boolean[];
  matrix: boolean[][];
  n_folds: number;
}
