import { readFileSync } from "fs";
import path from "path";
import { fileURLToPath } from "url";
import { describe, expect, it } from "vitest";

import {
  GRID_SCHEMA_TAG,
  parseGridCsv,
  parseSchemaLine,
  parseSweepCsv,
} from "../src/csv.js";

const FIXTURES = fileURLToPath(new URL("fixtures", import.meta.url));

function fixture(name: string): string {
  return readFileSync(path.join(FIXTURES, name), "utf-8");
}

describe("parseSchemaLine", () => {
  it("extracts the key=value fields", () => {
    const fields = parseSchemaLine("# krsketch-csv v1 kind=sweep_r");
    expect(fields).toEqual({ kind: "sweep_r" });
  });

  it("handles grid headers with several fields", () => {
    const fields = parseSchemaLine(
      "# krsketch-grid v1 label=truth nx=20",
      GRID_SCHEMA_TAG,
    );
    expect(fields).toEqual({ label: "truth", nx: "20" });
  });

  it("refuses a foreign tag", () => {
    expect(() => parseSchemaLine("# other-csv v1 kind=sweep_r")).toThrow(
      /not a krsketch-csv file/,
    );
  });

  it("refuses an unsupported version", () => {
    expect(() => parseSchemaLine("# krsketch-csv v2 kind=sweep_r")).toThrow(
      /schema version v2 is not supported/,
    );
    expect(() => parseSchemaLine("# krsketch-csv v99 kind=sweep_r")).toThrow(
      /not supported/,
    );
  });

  it("refuses a plain csv header line", () => {
    expect(() => parseSchemaLine("strategy,r,rel_error")).toThrow(/not a/);
  });
});

describe("parseSweepCsv", () => {
  it("reads a synthetic sweep file with exact field values", () => {
    const { kind, records } = parseSweepCsv(fixture("tiny_sweep_r.csv"));
    expect(kind).toBe("sweep_r");
    // 3 strategies x 3 grid points x 3 trials
    expect(records).toHaveLength(27);
    const first = records[0];
    expect(first.strategy).toBe("case1");
    expect(first.r).toBe(16);
    expect(first.r1).toBe(4);
    expect(first.r2).toBe(4);
    expect(first.n1).toBe(9);
    expect(first.n2).toBe(9);
    expect(first.p).toBe(3);
    expect(first.trial).toBe(1);
    expect(first.rel_error).toBe(0.05965151684818899);
    expect(first.wall_time_ms).toBe(0);
    expect(first.nx).toBeNull();
    expect(first.sigma_star).toBeNull();
  });

  it("reads the reconstruction sweep's extra columns", () => {
    const { kind, records } = parseSweepCsv(fixture("tiny_eit.csv"));
    expect(kind).toBe("eit_sweep");
    for (const rec of records) {
      expect(rec.nx).toBe(4);
      expect(rec.sigma_star).toBe(10);
      expect(rec.noise_sd).toBe(1e-8);
      expect(rec.r1).toBeNull();
      expect(rec.r2).toBeNull();
    }
  });

  it("refuses a newer schema version", () => {
    const text = fixture("tiny_sweep_r.csv").replace(
      "# krsketch-csv v1",
      "# krsketch-csv v2",
    );
    expect(() => parseSweepCsv(text)).toThrow(/not supported/);
  });

  it("refuses an unknown sweep kind", () => {
    const text = fixture("tiny_sweep_r.csv").replace(
      "kind=sweep_r",
      "kind=sweep_q",
    );
    expect(() => parseSweepCsv(text)).toThrow(/unknown sweep kind/);
  });

  it("refuses a file missing a required column", () => {
    const lines = fixture("tiny_sweep_r.csv").split("\n");
    lines[1] = lines[1].replace("rel_error", "relerr");
    expect(() => parseSweepCsv(lines.join("\n"))).toThrow(
      /missing column rel_error/,
    );
  });

  it("refuses a short data row", () => {
    const text = fixture("tiny_sweep_r.csv") + "case1,16\n";
    expect(() => parseSweepCsv(text)).toThrow(/short row/);
  });
});

describe("parseGridCsv", () => {
  it("reads a reconstruction grid with x-major cell layout", () => {
    const grid = parseGridCsv(fixture("tiny_eit.grid_truth.csv"));
    expect(grid.label).toBe("truth");
    expect(grid.nx).toBe(4);
    expect(grid.values).toHaveLength(16);
    // Row for (ci, cj) lands at cj * nx + ci
    const lines = fixture("tiny_eit.grid_truth.csv").trim().split("\n").slice(2);
    for (const line of lines) {
      const [ci, cj, v] = line.split(",");
      expect(grid.values[Number(cj) * 4 + Number(ci)]).toBe(Number(v));
    }
  });

  it("refuses a grid tag on a sweep reader and vice versa", () => {
    expect(() => parseGridCsv(fixture("tiny_sweep_r.csv"))).toThrow(
      /not a krsketch-grid file/,
    );
    expect(() => parseSweepCsv(fixture("tiny_eit.grid_truth.csv"))).toThrow(
      /not a krsketch-csv file/,
    );
  });

  it("refuses a grid that does not cover every cell", () => {
    const lines = fixture("tiny_eit.grid_truth.csv").trim().split("\n");
    lines.pop();
    expect(() => parseGridCsv(lines.join("\n"))).toThrow(/does not cover/);
  });

  it("refuses an out-of-range cell index", () => {
    const text = fixture("tiny_eit.grid_truth.csv") + "9,0,1.0\n";
    expect(() => parseGridCsv(text)).toThrow(/outside 4x4 grid/);
  });
});
