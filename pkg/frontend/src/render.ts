/** SVG/HTML builders for service payloads.
 *
 * Pure functions from plot data to markup: geometry and category labels come
 * from the service, styling decisions (palette, marker shapes) live here.
 */
import type {
  BarrierTreePlot,
  CellMappingPlot,
  FeatureValue,
  FunctionPlot,
  ImportancePlot,
  InfoContentPlot,
} from "./types.js";

const BASIN_PALETTE = [
  "#4e9a06", "#3465a4", "#c17d11", "#75507b", "#cc0000", "#06989a",
  "#8f5902", "#4d4d9f", "#5c8a5c", "#a40000",
];

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function formatValue(value: FeatureValue): string {
  if (value === null || value === undefined) return "NA";
  if (Number.isInteger(value)) return String(value);
  return value.toPrecision(6);
}

export function renderFeatureTable(features: Record<string, FeatureValue>): string {
  const rows = Object.entries(features)
    .map(([name, value]) =>
      `<tr><td class="feat-name">${esc(name)}</td>` +
      `<td class="feat-value">${formatValue(value)}</td></tr>`)
    .join("");
  return `<table class="feature-table" data-testid="feature-table">` +
    `<thead><tr><th>feature</th><th>value</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`;
}

// ---------------------------------------------------------------------------
// cell mapping

export function renderCellMapping(plot: CellMappingPlot, size = 420): string {
  const [nx, ny] = plot.blocks;
  const w = size;
  const h = (size * ny) / nx;
  const cw = w / nx;
  const ch = h / ny;
  const basinColor = new Map<number, string>();
  for (const cell of plot.cells) {
    if (cell.class === "attractor" && !basinColor.has(cell.cell)) {
      basinColor.set(cell.cell, BASIN_PALETTE[basinColor.size % BASIN_PALETTE.length]);
    }
  }
  const parts: string[] = [];
  for (const cell of plot.cells) {
    const [ix, iy] = cell.coords;
    const x = ix * cw;
    const y = h - (iy + 1) * ch; // grid y axis points up
    let fill = "#bbbbbb";
    if (cell.class === "attractor") fill = "#111111";
    else if (cell.class === "certain" && cell.basin !== null) {
      fill = basinColor.get(cell.basin) ?? "#bbbbbb";
    }
    parts.push(
      `<rect class="cm-cell cm-${cell.class}" x="${x.toFixed(2)}" y="${y.toFixed(2)}" ` +
      `width="${cw.toFixed(2)}" height="${ch.toFixed(2)}" fill="${fill}" stroke="#fff"/>`);
    // arrows scaled by absorption probability
    const cx = x + cw / 2;
    const cy = y + ch / 2;
    for (const arrow of cell.arrows) {
      const len = (Math.min(cw, ch) / 2) * arrow.length;
      const dx = arrow.direction[0] * len;
      const dy = -arrow.direction[1] * len;
      parts.push(
        `<line class="cm-arrow" x1="${cx.toFixed(2)}" y1="${cy.toFixed(2)}" ` +
        `x2="${(cx + dx).toFixed(2)}" y2="${(cy + dy).toFixed(2)}" ` +
        `stroke="#ffffff" stroke-width="1.4" marker-end="url(#arrowhead)"/>`);
    }
  }
  return `<svg class="plot cellmapping" viewBox="0 0 ${w} ${h}" data-testid="plot-cellmapping">` +
    `<defs><marker id="arrowhead" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto">` +
    `<path d="M0,0 L6,3 L0,6 z" fill="#ffffff"/></marker></defs>${parts.join("")}</svg>`;
}

// ---------------------------------------------------------------------------
// barrier trees

export function renderBarrierTree2D(plot: BarrierTreePlot, size = 420): string {
  // nodes drawn at their cell coordinates in decision space
  const xs = plot.nodes.map((n) => n.coords[0]);
  const ys = plot.nodes.map((n) => n.coords[1]);
  const pad = 24;
  const minX = Math.min(...xs), maxX = Math.max(...xs);
  const minY = Math.min(...ys), maxY = Math.max(...ys);
  const sx = (v: number) =>
    pad + ((v - minX) / Math.max(maxX - minX, 1e-9)) * (size - 2 * pad);
  const sy = (v: number) =>
    size - pad - ((v - minY) / Math.max(maxY - minY, 1e-9)) * (size - 2 * pad);

  const byId = new Map(plot.nodes.map((n) => [n.id, n]));
  const parts: string[] = [];
  for (const edge of plot.edges) {
    const a = byId.get(edge.parent)!;
    const b = byId.get(edge.child)!;
    const color = BASIN_PALETTE[b.level % BASIN_PALETTE.length];
    parts.push(
      `<line class="bt-edge bt-level-${b.level}" x1="${sx(a.coords[0]).toFixed(1)}" ` +
      `y1="${sy(a.coords[1]).toFixed(1)}" x2="${sx(b.coords[0]).toFixed(1)}" ` +
      `y2="${sy(b.coords[1]).toFixed(1)}" stroke="${color}" stroke-width="2"/>`);
  }
  for (const node of plot.nodes) {
    const x = sx(node.coords[0]);
    const y = sy(node.coords[1]);
    if (node.role === "leaf") {
      parts.push(`<circle class="bt-leaf" cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="6" fill="#222"/>`);
    } else {
      parts.push(
        `<circle class="bt-saddle" cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="6" ` +
        `fill="none" stroke="#222" stroke-width="2"/>`);
    }
    parts.push(
      `<text class="bt-label" x="${(x + 8).toFixed(1)}" y="${(y - 8).toFixed(1)}">` +
      `${node.cell}</text>`);
  }
  const rm = plot.root_marker;
  const rx = sx(rm.coords[0]);
  const ry = sy(rm.coords[1]);
  parts.push(
    `<path class="bt-root" d="M ${rx} ${ry - 9} L ${rx - 8} ${ry + 7} L ${rx + 8} ${ry + 7} z" ` +
    `fill="#cc0000"/>`);
  return `<svg class="plot barriertree2d" viewBox="0 0 ${size} ${size}" ` +
    `data-testid="plot-barriertree2d">${parts.join("")}</svg>`;
}

export function renderBarrierTree3D(plot: BarrierTreePlot, size = 460): string {
  // orthographic projection of the representative surface with the tree on top
  const surface = plot.surface;
  if (!surface) {
    return renderBarrierTree2D(plot, size);
  }
  const values = surface.z.flat().filter((v): v is number => v !== null);
  const zMin = Math.min(...values);
  const zMax = Math.max(...values);
  const zSpan = Math.max(zMax - zMin, 1e-9);
  const nx = surface.x.length;
  const ny = surface.y.length;

  const project = (ix: number, iy: number, z: number): [number, number] => {
    const u = (ix + 0.5) / nx;
    const v = (iy + 0.5) / ny;
    const x = 60 + (u - v) * 0.5 * (size - 120) + (size - 120) / 2;
    const y = size - 90 - (u + v) * 0.25 * (size - 120) -
      ((z - zMin) / zSpan) * (size * 0.35);
    return [x, y];
  };

  const parts: string[] = [];
  for (let ix = 0; ix < nx - 1; ix++) {
    for (let iy = 0; iy < ny - 1; iy++) {
      const quad = [[ix, iy], [ix + 1, iy], [ix + 1, iy + 1], [ix, iy + 1]];
      const zs = quad.map(([a, b]) => surface.z[a][b]);
      if (zs.some((v) => v === null)) continue;
      const pts = quad.map(([a, b], k) => project(a, b, zs[k] as number));
      const level = ((zs[0] as number) - zMin) / zSpan;
      const shade = Math.round(230 - level * 140);
      parts.push(
        `<polygon class="bt3d-quad" points="${pts.map((p) => p.map((c) => c.toFixed(1)).join(",")).join(" ")}" ` +
        `fill="rgb(${shade},${shade},255)" stroke="#667" stroke-width="0.4"/>`);
    }
  }

  const gridIndex = (coord: number, axis: number[]): number => {
    let best = 0;
    for (let i = 1; i < axis.length; i++) {
      if (Math.abs(axis[i] - coord) < Math.abs(axis[best] - coord)) best = i;
    }
    return best;
  };
  const nodePoint = (nodeId: number): [number, number] => {
    const node = plot.nodes.find((n) => n.id === nodeId)!;
    return project(gridIndex(node.coords[0], surface.x),
                   gridIndex(node.coords[1], surface.y), node.height);
  };
  for (const edge of plot.edges) {
    const [x1, y1] = nodePoint(edge.parent);
    const [x2, y2] = nodePoint(edge.child);
    const child = plot.nodes.find((n) => n.id === edge.child)!;
    const color = BASIN_PALETTE[child.level % BASIN_PALETTE.length];
    parts.push(
      `<line class="bt-edge" x1="${x1.toFixed(1)}" y1="${y1.toFixed(1)}" ` +
      `x2="${x2.toFixed(1)}" y2="${y2.toFixed(1)}" stroke="${color}" stroke-width="2.5"/>`);
  }
  for (const node of plot.nodes) {
    const [x, y] = nodePoint(node.id);
    if (node.role === "leaf") {
      parts.push(`<circle class="bt-leaf" cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="5" fill="#222"/>`);
    } else {
      parts.push(
        `<circle class="bt-saddle" cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="5" ` +
        `fill="#fff" stroke="#222" stroke-width="2"/>`);
    }
  }
  const [rx, ry] = nodePoint(plot.root_marker.id);
  parts.push(
    `<path class="bt-root" d="M ${rx} ${ry - 8} L ${rx - 7} ${ry + 6} L ${rx + 7} ${ry + 6} z" ` +
    `fill="#cc0000"/>`);
  return `<svg class="plot barriertree3d" viewBox="0 0 ${size} ${size}" ` +
    `data-testid="plot-barriertree3d">${parts.join("")}</svg>`;
}

// ---------------------------------------------------------------------------
// information content

export function renderInfoContent(plot: InfoContentPlot, width = 480, height = 320): string {
  const pad = 40;
  const positive = plot.eps
    .map((eps, i) => ({ eps, h: plot.h[i], m: plot.m[i] }))
    .filter((p) => p.eps > 0);
  const logs = positive.map((p) => Math.log10(p.eps));
  const minL = Math.min(...logs);
  const maxL = Math.max(...logs);
  const sx = (eps: number) =>
    pad + ((Math.log10(eps) - minL) / Math.max(maxL - minL, 1e-9)) * (width - 2 * pad);
  const sy = (v: number) => height - pad - v * (height - 2 * pad);

  const path = (key: "h" | "m") =>
    positive.map((p, i) => `${i === 0 ? "M" : "L"} ${sx(p.eps).toFixed(1)} ${sy(p[key]).toFixed(1)}`).join(" ");

  const parts = [
    `<path class="ic-h" d="${path("h")}" fill="none" stroke="#cc0000" stroke-width="2"/>`,
    `<path class="ic-m" d="${path("m")}" fill="none" stroke="#3465a4" stroke-width="2" stroke-dasharray="6 3"/>`,
  ];
  const markers = plot.markers;
  if (markers.m0) {
    const x = pad;
    const y = sy(markers.m0.value);
    parts.push(
      `<path class="ic-marker ic-m0" d="M ${x} ${y - 7} L ${x - 7} ${y} L ${x} ${y + 7} L ${x + 7} ${y} z" ` +
      `fill="#3465a4"><title>m0</title></path>`);
  }
  if (markers.h_max) {
    parts.push(
      `<circle class="ic-marker ic-hmax" cx="${sx(Math.max(markers.h_max.eps, positive[0].eps)).toFixed(1)}" ` +
      `cy="${sy(markers.h_max.value).toFixed(1)}" r="6" fill="#cc0000"><title>h_max</title></circle>`);
  }
  if (markers.eps_s) {
    parts.push(
      `<rect class="ic-marker ic-eps-s" x="${(sx(markers.eps_s.eps) - 5).toFixed(1)}" ` +
      `y="${(sy(markers.eps_s.value) - 5).toFixed(1)}" width="10" height="10" fill="#111">` +
      `<title>eps_s</title></rect>`);
  }
  if (markers.eps_ratio) {
    const x = sx(markers.eps_ratio.eps);
    const y = sy(markers.eps_ratio.value);
    parts.push(
      `<path class="ic-marker ic-eps-ratio" d="M ${x} ${y - 7} L ${x - 7} ${y + 6} L ${x + 7} ${y + 6} z" ` +
      `fill="#4e9a06"><title>eps_ratio</title></path>`);
  }
  const axis =
    `<line x1="${pad}" y1="${height - pad}" x2="${width - pad}" y2="${height - pad}" stroke="#333"/>` +
    `<line x1="${pad}" y1="${pad}" x2="${pad}" y2="${height - pad}" stroke="#333"/>`;
  return `<svg class="plot infocontent" viewBox="0 0 ${width} ${height}" ` +
    `data-testid="plot-infocontent">${axis}${parts.join("")}</svg>`;
}

// ---------------------------------------------------------------------------
// function plots

export function renderFunctionPlot(plot: FunctionPlot, size = 420): string {
  if (plot.kind === "function1d") {
    const values = plot.values ?? [];
    const vMin = Math.min(...values);
    const vMax = Math.max(...values);
    const span = Math.max(vMax - vMin, 1e-9);
    const pad = 30;
    const sx = (i: number) => pad + (i / (values.length - 1)) * (size - 2 * pad);
    const sy = (v: number) => size - pad - ((v - vMin) / span) * (size - 2 * pad);
    const d = values.map((v, i) => `${i === 0 ? "M" : "L"} ${sx(i).toFixed(1)} ${sy(v).toFixed(1)}`).join(" ");
    return `<svg class="plot function1d" viewBox="0 0 ${size} ${size}" data-testid="plot-function">` +
      `<path d="${d}" fill="none" stroke="#3465a4" stroke-width="2"/></svg>`;
  }
  const z = plot.z ?? [];
  const ny = z.length;          // rows follow the y axis
  const nx = ny > 0 ? z[0].length : 0;
  const flat = z.flat();
  const vMin = Math.min(...flat);
  const span = Math.max(Math.max(...flat) - vMin, 1e-9);
  const cw = size / nx;
  const ch = size / ny;
  const cells: string[] = [];
  for (let iy = 0; iy < ny; iy++) {
    for (let ix = 0; ix < nx; ix++) {
      const level = (z[iy][ix] - vMin) / span;
      const r = Math.round(40 + level * 215);
      const g = Math.round(60 + (1 - level) * 160);
      const b = Math.round(160 - level * 120);
      cells.push(
        `<rect x="${(ix * cw).toFixed(1)}" y="${(size - (iy + 1) * ch).toFixed(1)}" ` +
        `width="${cw.toFixed(1)}" height="${ch.toFixed(1)}" fill="rgb(${r},${g},${b})"/>`);
    }
  }
  return `<svg class="plot function2d" viewBox="0 0 ${size} ${size}" ` +
    `data-testid="plot-function">${cells.join("")}</svg>`;
}

// ---------------------------------------------------------------------------
// feature importance

export function renderImportance(plot: ImportancePlot, cell = 22): string {
  const width = 180 + plot.features.length * cell;
  const height = 60 + plot.n_folds * cell;
  const parts: string[] = [];
  plot.features.forEach((name, j) => {
    const color = plot.important[j] ? "#cc0000" : "#f57900";
    parts.push(
      `<text class="imp-feature${plot.important[j] ? " imp-important" : ""}" ` +
      `x="${(180 + j * cell + cell / 2).toFixed(0)}" y="40" ` +
      `transform="rotate(-45 ${180 + j * cell + cell / 2} 40)">${esc(name)}</text>`);
    for (let fold = 0; fold < plot.n_folds; fold++) {
      if (plot.matrix[fold][j]) {
        parts.push(
          `<circle class="imp-dot" cx="${(180 + j * cell + cell / 2).toFixed(0)}" ` +
          `cy="${(60 + fold * cell + cell / 2).toFixed(0)}" r="6" fill="${color}"/>`);
      }
    }
  });
  for (let fold = 0; fold < plot.n_folds; fold++) {
    parts.push(
      `<text class="imp-fold" x="8" y="${(60 + fold * cell + cell / 2 + 4).toFixed(0)}">` +
      `fold ${fold + 1}</text>`);
  }
  return `<svg class="plot importance" viewBox="0 0 ${width} ${height}" ` +
    `data-testid="plot-importance">${parts.join("")}</svg>`;
}
