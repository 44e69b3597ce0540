/**
 * Figure assembly from sweep CSVs and reconstruction grids.
 *
 * Five figure kinds: the three synthetic sweeps (error versus r, n, p),
 * the reconstruction panel grid, and the reconstruction error sweep.
 * Rendering is read-only with respect to the data: medians are recomputed
 * from the raw trial rows and, when a medians sidecar is supplied, must
 * match the stored values exactly or rendering aborts.  Output is SVG.
 */

import { readFile, writeFile } from "fs/promises";
import { existsSync } from "fs";

import { GridData, parseGridCsv, parseSweepCsv, SweepKind } from "./csv.js";
import { mediansByGroup, parseMediansJson, verifyMedians } from "./median.js";
import {
  FALLBACK_COLOR,
  fieldColor,
  GRID_COLOR,
  GUIDELINE_COLOR,
  STRATEGY_COLORS,
  STRATEGY_MARKERS,
  TEXT_COLOR,
  TICK_TEXT_COLOR,
} from "./style.js";
import { buildLineChart, esc, fmtTick, LineSeries } from "./svg.js";

export const FIGURE_KINDS = [
  "sweep_r",
  "sweep_n",
  "sweep_p",
  "eit_panels",
  "eit_sweep",
] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export type AxisScale = "log-log" | "linear";

const AXIS_LABELS: Record<SweepKind, [string, string]> = {
  sweep_r: ["r", "relative error"],
  sweep_n: ["n", "relative error"],
  sweep_p: ["p", "relative error"],
  eit_sweep: ["r", "relative error"],
};

const DEFAULT_SCALE: Record<SweepKind, AxisScale> = {
  sweep_r: "log-log",
  sweep_n: "linear",
  sweep_p: "linear",
  eit_sweep: "log-log",
};

/** What to draw: input files, figure kind, output basename, and options. */
export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  outBase: string;
  strategies?: string[] | null;
  scale?: AxisScale | null;
  medians?: string | null;
}

export function validateSpec(spec: FigureSpec): void {
  if (!(FIGURE_KINDS as readonly string[]).includes(spec.kind)) {
    throw new Error(`unknown figure kind ${JSON.stringify(spec.kind)}`);
  }
  if (spec.inputs.length === 0) {
    throw new Error("figure needs at least one input file");
  }
  if (spec.scale != null && spec.scale !== "log-log" && spec.scale !== "linear") {
    throw new Error(`unknown axis scale ${JSON.stringify(spec.scale)}`);
  }
}

/**
 * Build a sweep figure from raw CSV text.  When a medians sidecar's text
 * is supplied, the stored medians must match the recomputed ones exactly.
 */
export function sweepFigureSvg(
  kind: SweepKind,
  csvText: string,
  opts: {
    strategies?: string[] | null;
    scale?: AxisScale | null;
    mediansText?: string | null;
    inputPath?: string;
  } = {},
): string {
  const { kind: csvKind, records } = parseSweepCsv(csvText, opts.inputPath);
  if (csvKind !== kind) {
    throw new Error(
      `input file holds ${JSON.stringify(csvKind)} data, figure is ${JSON.stringify(kind)}`,
    );
  }
  const groups = mediansByGroup(records, kind);
  if (opts.mediansText != null) {
    verifyMedians(groups, parseMediansJson(opts.mediansText), kind);
  }

  const present: string[] = [];
  for (const g of groups) {
    if (!present.includes(g.strategy)) present.push(g.strategy);
  }
  const wanted = opts.strategies ?? present;
  const chosen = wanted.filter((s) => present.includes(s));
  if (chosen.length === 0) {
    throw new Error(
      `no data for requested strategies ${JSON.stringify(wanted)}; ` +
        `file has ${JSON.stringify(present)}`,
    );
  }

  const scale = opts.scale ?? DEFAULT_SCALE[kind];
  const log = scale === "log-log";
  const series: LineSeries[] = chosen.map((strategy) => {
    const pts = groups
      .filter((g) => g.strategy === strategy)
      .map((g): [number, number] => [g.key, g.median_rel_error])
      .sort((a, b) => a[0] - b[0]);
    return {
      xs: pts.map((pt) => pt[0]),
      ys: pts.map((pt) => pt[1]),
      color: STRATEGY_COLORS[strategy] ?? FALLBACK_COLOR,
      label: strategy,
      marker: STRATEGY_MARKERS[strategy] ?? "circle",
    };
  });

  if (kind === "sweep_r" && scale === "log-log") {
    // 1/r reference line anchored at the first plotted point
    const allPts = groups
      .map((g): [number, number] => [g.key, g.median_rel_error])
      .sort((a, b) => a[0] - b[0] || a[1] - b[1]);
    const [x0, y0] = allPts[0];
    const xs = allPts.map((pt) => pt[0]);
    series.push({
      xs,
      ys: xs.map((x) => (y0 * x0) / x),
      color: GUIDELINE_COLOR,
      label: "1/r",
      dash: "6,3",
      width: 1.2,
    });
  }

  const [xLabel, yLabel] = AXIS_LABELS[kind];
  return buildLineChart({ series, xLabel, yLabel, logX: log, logY: log });
}

/**
 * Build the reconstruction panel grid: ground truth plus reconstructions
 * as heatmaps in two columns, on a shared color range, with a colorbar.
 */
export function panelsFigureSvg(grids: GridData[]): string {
  if (grids.length < 2) {
    throw new Error("panel figure needs the ground truth and reconstructions");
  }
  const ncols = 2;
  const nrows = Math.ceil(grids.length / ncols);
  const panel = 240;
  const gap = 26;
  const mt = 34;
  const ml = 16;
  const barW = 16;
  const barGap = 30;
  const W = ml + ncols * panel + (ncols - 1) * gap + barGap + barW + 64;
  const H = mt + nrows * panel + (nrows - 1) * gap + 16;

  const vmin = Math.min(...grids.map((g) => Math.min(...g.values)));
  const vmax = Math.max(...grids.map((g) => Math.max(...g.values)));
  const span = vmax - vmin || 1;

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;

  grids.forEach((grid, idx) => {
    const px = ml + (idx % ncols) * (panel + gap);
    const py = mt + Math.floor(idx / ncols) * (panel + gap);
    const cell = panel / grid.nx;
    s += `<text x="${px + panel / 2}" y="${py - 8}" text-anchor="middle" font-size="12" fill="${TEXT_COLOR}">${esc(grid.label)}</text>\n`;
    for (let cj = 0; cj < grid.nx; cj += 1) {
      for (let ci = 0; ci < grid.nx; ci += 1) {
        const v = grid.values[cj * grid.nx + ci];
        const color = fieldColor((v - vmin) / span);
        // Cell row cj counts upward from the bottom edge
        const x = px + ci * cell;
        const y = py + panel - (cj + 1) * cell;
        s += `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${(cell + 0.05).toFixed(2)}" height="${(cell + 0.05).toFixed(2)}" fill="${color}"/>\n`;
      }
    }
    s += `<rect x="${px}" y="${py}" width="${panel}" height="${panel}" fill="none" stroke="${GRID_COLOR}" stroke-width="0.8"/>\n`;
  });

  // Colorbar: vertical gradient from vmin (bottom) to vmax (top)
  const bx = ml + ncols * panel + (ncols - 1) * gap + barGap;
  const by = mt;
  const barH = nrows * panel + (nrows - 1) * gap;
  const slices = 64;
  for (let i = 0; i < slices; i += 1) {
    const t = (i + 0.5) / slices;
    const y = by + barH - ((i + 1) * barH) / slices;
    s += `<rect x="${bx}" y="${y.toFixed(2)}" width="${barW}" height="${(barH / slices + 0.1).toFixed(2)}" fill="${fieldColor(t)}"/>\n`;
  }
  s += `<rect x="${bx}" y="${by}" width="${barW}" height="${barH}" fill="none" stroke="${GRID_COLOR}" stroke-width="0.8"/>\n`;
  const nLabels = 5;
  for (let i = 0; i < nLabels; i += 1) {
    const t = i / (nLabels - 1);
    const v = vmin + t * (vmax - vmin);
    const y = by + barH - t * barH;
    s += `<line x1="${bx + barW}" y1="${y.toFixed(1)}" x2="${bx + barW + 4}" y2="${y.toFixed(1)}" stroke="${TEXT_COLOR}" stroke-width="0.6"/>\n`;
    s += `<text x="${bx + barW + 7}" y="${(y + 3.5).toFixed(1)}" font-size="10" fill="${TICK_TEXT_COLOR}">${esc(fmtTick(Number(v.toPrecision(4))))}</text>\n`;
  }

  s += `</svg>\n`;
  return s;
}

/**
 * Render one figure from files on disk; returns the written paths.
 * Sweep kinds verify against the stored medians sidecar when present
 * next to the input, or the explicitly named one.
 */
export async function renderFigure(spec: FigureSpec): Promise<string[]> {
  validateSpec(spec);
  const outPath = spec.outBase + ".svg";
  if (spec.kind === "eit_panels") {
    const grids: GridData[] = [];
    for (const input of spec.inputs) {
      grids.push(parseGridCsv(await readFile(input, "utf-8"), input));
    }
    await writeFile(outPath, panelsFigureSvg(grids));
    return [outPath];
  }
  const input = spec.inputs[0];
  let mediansPath = spec.medians ?? null;
  if (mediansPath == null) {
    const sidecar = input + ".medians.json";
    if (existsSync(sidecar)) mediansPath = sidecar;
  }
  const svg = sweepFigureSvg(spec.kind, await readFile(input, "utf-8"), {
    strategies: spec.strategies,
    scale: spec.scale,
    mediansText: mediansPath == null ? null : await readFile(mediansPath, "utf-8"),
    inputPath: input,
  });
  await writeFile(outPath, svg);
  return [outPath];
}
