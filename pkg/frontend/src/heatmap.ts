// Grid view construction and rendering for the archive heatmap.
//
// The view is a pure function of the latest archive payload plus the
// preference weights the user has set this session. Rendering emits one
// node per matrix entry and nothing else, so a render can be checked
// against the payload cell for cell.

import type { ArchiveCell, ArchivePayload } from "./api.js";

export interface CellView {
  row: number;
  col: number;
  // full map cell behind this pixel: the displayed elite's cell, or the
  // reconstructed index on 2-d maps. Null when the position is empty on
  // a marginalized view and there is no single cell to act on.
  cell: number[] | null;
  fitness: number | null;
  individualId: number | null;
  occupied: boolean;
  weight: number;
}

export interface GridView {
  rows: number;
  cols: number;
  axes: number[];
  rowName: string;
  colName: string;
  matrix: CellView[][];
  // fitness range backing the color scale
  lo: number;
  hi: number;
}

export class ShapeMismatchError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ShapeMismatchError";
  }
}

/** Key for a full map cell, matching the server's selection counter keys. */
export function cellKey(cell: readonly number[]): string {
  return cell.join(",");
}

/** A 256-cell map of eight on/off dimensions folds into a 16x16 square. */
export function isBinaryMap(resolution: readonly number[]): boolean {
  return resolution.length === 8 && resolution.every((r) => r === 2);
}

type Weights = ReadonlyMap<string, number>;

export function buildGridView(payload: ArchivePayload, weights?: Weights): GridView {
  if (isBinaryMap(payload.resolution)) {
    return buildBinaryView(payload, weights);
  }
  return buildProjectedView(payload, weights);
}

function fitnessRange(matrix: CellView[][]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of matrix) {
    for (const cell of row) {
      if (cell.fitness === null) continue;
      if (cell.fitness < lo) lo = cell.fitness;
      if (cell.fitness > hi) hi = cell.fitness;
    }
  }
  if (lo > hi) return [0, 1];
  return [lo, hi];
}

function lookupWeight(cell: number[] | null, weights?: Weights): number {
  if (!cell || !weights) return 1;
  return weights.get(cellKey(cell)) ?? 1;
}

function buildProjectedView(payload: ArchivePayload, weights?: Weights): GridView {
  const axes = payload.axes;
  if (axes.length !== 2) {
    throw new ShapeMismatchError(`expected two axes, got ${axes.length}`);
  }
  const [a, b] = axes as [number, number];
  const rows = payload.resolution[a];
  const cols = payload.resolution[b];
  if (rows === undefined || cols === undefined) {
    throw new ShapeMismatchError(`axes ${a},${b} out of range for resolution ${payload.resolution.join("x")}`);
  }
  if (payload.heatmap.length !== rows) {
    throw new ShapeMismatchError(`heatmap has ${payload.heatmap.length} rows, map needs ${rows}`);
  }
  for (const row of payload.heatmap) {
    if (row.length !== cols) {
      throw new ShapeMismatchError(`heatmap row has ${row.length} columns, map needs ${cols}`);
    }
  }

  // displayed elite per pixel: best fitness among the cells that project
  // onto it, same marginalization the server applies to the heatmap
  const best = new Map<string, ArchiveCell>();
  for (const rec of payload.cells) {
    const key = `${rec.cell[a]}:${rec.cell[b]}`;
    const seen = best.get(key);
    if (!seen || rec.fitness > seen.fitness) {
      best.set(key, rec);
    }
  }

  const flat = payload.resolution.length === 2;
  const matrix: CellView[][] = [];
  for (let i = 0; i < rows; i++) {
    const out: CellView[] = [];
    for (let j = 0; j < cols; j++) {
      const fitness = payload.heatmap[i][j];
      const rec = best.get(`${i}:${j}`);
      let cell: number[] | null = rec ? [...rec.cell] : null;
      if (!cell && flat) {
        // empty position on a 2-d map still names a unique cell
        cell = [0, 0];
        cell[a] = i;
        cell[b] = j;
      }
      out.push({
        row: i,
        col: j,
        cell,
        fitness,
        individualId: rec ? rec.individual_id : null,
        occupied: fitness !== null,
        weight: lookupWeight(cell, weights),
      });
    }
    matrix.push(out);
  }

  const [lo, hi] = fitnessRange(matrix);
  return {
    rows,
    cols,
    axes: [a, b],
    rowName: payload.descriptor_names[a] ?? `d${a}`,
    colName: payload.descriptor_names[b] ?? `d${b}`,
    matrix,
    lo,
    hi,
  };
}

// Eight binary dimensions arrange as a 16x16 square: dimensions 0-3 index
// the row and 4-7 the column, first dimension most significant. Every map
// cell owns exactly one pixel, so no marginalization happens here.
function buildBinaryView(payload: ArchivePayload, weights?: Weights): GridView {
  const matrix: CellView[][] = [];
  for (let i = 0; i < 16; i++) {
    const out: CellView[] = [];
    for (let j = 0; j < 16; j++) {
      const cell = [
        (i >> 3) & 1,
        (i >> 2) & 1,
        (i >> 1) & 1,
        i & 1,
        (j >> 3) & 1,
        (j >> 2) & 1,
        (j >> 1) & 1,
        j & 1,
      ];
      out.push({
        row: i,
        col: j,
        cell,
        fitness: null,
        individualId: null,
        occupied: false,
        weight: lookupWeight(cell, weights),
      });
    }
    matrix.push(out);
  }

  for (const rec of payload.cells) {
    if (rec.cell.length !== 8 || rec.cell.some((c) => c !== 0 && c !== 1)) {
      throw new ShapeMismatchError(`cell ${cellKey(rec.cell)} is not an 8-bit index`);
    }
    const row = (rec.cell[0] << 3) | (rec.cell[1] << 2) | (rec.cell[2] << 1) | rec.cell[3];
    const col = (rec.cell[4] << 3) | (rec.cell[5] << 2) | (rec.cell[6] << 1) | rec.cell[7];
    const view = matrix[row][col];
    view.fitness = rec.fitness;
    view.individualId = rec.individual_id;
    view.occupied = true;
  }

  const [lo, hi] = fitnessRange(matrix);
  const nameSpan = (from: number, to: number) =>
    payload.descriptor_names.slice(from, to).join("/") || `d${from}-d${to - 1}`;
  return {
    rows: 16,
    cols: 16,
    axes: [0, 1],
    rowName: nameSpan(0, 4),
    colName: nameSpan(4, 8),
    matrix,
    lo,
    hi,
  };
}

/** Color for an elite's fitness on a dark background, low to high. */
export function fitnessColor(fitness: number, lo: number, hi: number): string {
  const span = hi - lo;
  const t = span > 0 ? (fitness - lo) / span : 1;
  // two-stop ramp: deep blue through teal to warm yellow
  const stops: [number, number, number][] = [
    [30, 42, 90],
    [42, 157, 143],
    [255, 209, 102],
  ];
  const scaled = t * (stops.length - 1);
  const idx = Math.min(Math.floor(scaled), stops.length - 2);
  const frac = scaled - idx;
  const mix = stops[idx].map((c, ch) => Math.round(c + (stops[idx + 1][ch] - c) * frac));
  return `rgb(${mix[0]}, ${mix[1]}, ${mix[2]})`;
}

function escapeTitle(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/"/g, "&quot;").replace(/</g, "&lt;");
}

/**
 * HTML for the grid: one div per matrix entry, empty cells marked, the
 * selected cell outlined, preference weights badged.
 */
export function heatmapHTML(view: GridView, selected: { row: number; col: number } | null): string {
  const parts: string[] = [];
  parts.push(
    `<div class="grid" style="grid-template-columns: repeat(${view.cols}, var(--cell-size))">`,
  );
  for (const row of view.matrix) {
    for (const cv of row) {
      const classes = ["cell"];
      if (!cv.occupied) classes.push("missing");
      if (selected && selected.row === cv.row && selected.col === cv.col) classes.push("selected");
      const style =
        cv.fitness !== null
          ? ` style="background-color: ${fitnessColor(cv.fitness, view.lo, view.hi)}"`
          : "";
      const title =
        cv.fitness !== null
          ? `${view.rowName}=${cv.row} ${view.colName}=${cv.col} fitness=${cv.fitness.toFixed(4)}`
          : `${view.rowName}=${cv.row} ${view.colName}=${cv.col} empty`;
      const badge = cv.weight !== 1 ? `<span class="badge">${cv.weight}</span>` : "";
      parts.push(
        `<div class="${classes.join(" ")}" data-row="${cv.row}" data-col="${cv.col}"` +
          ` title="${escapeTitle(title)}"${style}>${badge}</div>`,
      );
    }
  }
  parts.push("</div>");
  return parts.join("");
}
