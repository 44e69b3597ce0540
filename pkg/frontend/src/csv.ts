/**
 * Readers for the delimited files the sweep CLI emits.
 *
 * Every file starts with a schema comment line, e.g.
 *
 *   # krsketch-csv v1 kind=sweep_r
 *   # krsketch-grid v1 label=truth nx=20
 *
 * Readers refuse files whose schema tag or version differs from this
 * module's; figures must never be drawn from data they misread.
 */

export const SCHEMA_TAG = "krsketch-csv";
export const GRID_SCHEMA_TAG = "krsketch-grid";
export const SCHEMA_VERSION = 1;

export const SWEEP_KINDS = ["sweep_r", "sweep_n", "sweep_p", "eit_sweep"] as const;
export type SweepKind = (typeof SWEEP_KINDS)[number];

/** One trial of one strategy at one grid point. */
export interface SweepRecord {
  strategy: string;
  r: number;
  r1: number | null;
  r2: number | null;
  n1: number;
  n2: number;
  p: number;
  trial: number;
  rel_error: number;
  wall_time_ms: number;
  nx: number | null;
  sigma_star: number | null;
  noise_sd: number | null;
}

/** A cell-valued field on an nx-by-nx grid; values[cj * nx + ci]. */
export interface GridData {
  label: string;
  nx: number;
  values: number[];
}

/** Parse and validate the leading schema comment; returns its fields. */
export function parseSchemaLine(
  line: string,
  expectedTag: string = SCHEMA_TAG,
): Record<string, string> {
  const parts = line.trim().replace(/^#+/, "").trim().split(/\s+/);
  if (parts.length < 2 || parts[0] !== expectedTag) {
    throw new Error(`not a ${expectedTag} file: ${JSON.stringify(line.trim())}`);
  }
  const version = parts[1];
  if (version !== `v${SCHEMA_VERSION}`) {
    throw new Error(
      `schema version ${version} is not supported (expected v${SCHEMA_VERSION})`,
    );
  }
  const fields: Record<string, string> = {};
  for (const item of parts.slice(2)) {
    const eq = item.indexOf("=");
    if (eq < 0) {
      fields[item] = "";
    } else {
      fields[item.slice(0, eq)] = item.slice(eq + 1);
    }
  }
  return fields;
}

function splitLines(text: string): string[] {
  const lines = text.split("\n");
  while (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  return lines;
}

function requireColumn(header: string[], name: string, path: string): number {
  const idx = header.indexOf(name);
  if (idx < 0) throw new Error(`missing column ${name} in ${path}`);
  return idx;
}

function intField(cells: string[], idx: number): number {
  const value = parseInt(cells[idx], 10);
  if (!Number.isFinite(value)) throw new Error(`bad integer field: ${cells[idx]}`);
  return value;
}

function floatField(cells: string[], idx: number): number {
  const value = Number(cells[idx]);
  if (!Number.isFinite(value)) throw new Error(`bad float field: ${cells[idx]}`);
  return value;
}

function optIntField(cells: string[], idx: number): number | null {
  return idx >= 0 && cells[idx] !== "" ? intField(cells, idx) : null;
}

function optFloatField(cells: string[], idx: number): number | null {
  return idx >= 0 && cells[idx] !== "" ? floatField(cells, idx) : null;
}

/** Read a sweep CSV; returns its kind and trial records. */
export function parseSweepCsv(
  text: string,
  path = "<sweep csv>",
): { kind: SweepKind; records: SweepRecord[] } {
  const lines = splitLines(text);
  if (lines.length < 2) throw new Error(`truncated sweep file: ${path}`);
  const fields = parseSchemaLine(lines[0]);
  const kind = fields["kind"] ?? "";
  if (!(SWEEP_KINDS as readonly string[]).includes(kind)) {
    throw new Error(`unknown sweep kind ${JSON.stringify(kind)} in ${path}`);
  }
  const header = lines[1].split(",");
  const col = {
    strategy: requireColumn(header, "strategy", path),
    r: requireColumn(header, "r", path),
    r1: requireColumn(header, "r1", path),
    r2: requireColumn(header, "r2", path),
    n1: requireColumn(header, "n1", path),
    n2: requireColumn(header, "n2", path),
    p: requireColumn(header, "p", path),
    trial: requireColumn(header, "trial", path),
    rel_error: requireColumn(header, "rel_error", path),
    wall_time_ms: requireColumn(header, "wall_time_ms", path),
    nx: header.indexOf("nx"),
    sigma_star: header.indexOf("sigma_star"),
    noise_sd: header.indexOf("noise_sd"),
  };
  const records: SweepRecord[] = [];
  for (const line of lines.slice(2)) {
    const cells = line.split(",");
    if (cells.length < header.length) {
      throw new Error(`short row in ${path}: ${JSON.stringify(line)}`);
    }
    records.push({
      strategy: cells[col.strategy],
      r: intField(cells, col.r),
      r1: optIntField(cells, col.r1),
      r2: optIntField(cells, col.r2),
      n1: intField(cells, col.n1),
      n2: intField(cells, col.n2),
      p: intField(cells, col.p),
      trial: intField(cells, col.trial),
      rel_error: floatField(cells, col.rel_error),
      wall_time_ms: floatField(cells, col.wall_time_ms),
      nx: optIntField(cells, col.nx),
      sigma_star: optFloatField(cells, col.sigma_star),
      noise_sd: optFloatField(cells, col.noise_sd),
    });
  }
  return { kind: kind as SweepKind, records };
}

/** Read a grid CSV written as cell_i, cell_j, sigma_hat rows. */
export function parseGridCsv(text: string, path = "<grid csv>"): GridData {
  const lines = splitLines(text);
  if (lines.length < 2) throw new Error(`truncated grid file: ${path}`);
  const fields = parseSchemaLine(lines[0], GRID_SCHEMA_TAG);
  const label = fields["label"] ?? "";
  const nx = parseInt(fields["nx"] ?? "", 10);
  if (!Number.isFinite(nx) || nx < 1) {
    throw new Error(`grid file ${path} has no valid nx field`);
  }
  const header = lines[1].split(",");
  const ciCol = requireColumn(header, "cell_i", path);
  const cjCol = requireColumn(header, "cell_j", path);
  const valCol = requireColumn(header, "sigma_hat", path);
  const values = new Array<number>(nx * nx).fill(NaN);
  for (const line of lines.slice(2)) {
    const cells = line.split(",");
    const ci = intField(cells, ciCol);
    const cj = intField(cells, cjCol);
    if (ci < 0 || ci >= nx || cj < 0 || cj >= nx) {
      throw new Error(`cell (${ci}, ${cj}) outside ${nx}x${nx} grid in ${path}`);
    }
    values[cj * nx + ci] = floatField(cells, valCol);
  }
  if (values.some((v) => Number.isNaN(v))) {
    throw new Error(`grid file ${path} does not cover all ${nx * nx} cells`);
  }
  return { label, nx, values };
}
