#!/usr/bin/env node
/**
 * Figure rendering tool for sweep CSVs and reconstruction grids.
 *
 * Usage:
 *   krsketch-plot --input FILE [--input FILE ...] --kind KIND [--out BASE]
 *                 [--strategy a,b] [--scale log-log|linear] [--medians FILE]
 *
 * --input    input CSV; repeat for the panel figure's grid files
 * --kind     sweep_r | sweep_n | sweep_p | eit_panels | eit_sweep
 * --out      output basename (writes BASE.svg; default: the kind)
 * --strategy comma-separated strategy subset to draw
 * --scale    axis scale override
 * --medians  stored medians JSON to verify against
 *            (default: <input>.medians.json when it exists)
 *
 * Exit codes: 0 success, 1 usage, 2 data or rendering failure.
 */

import { pathToFileURL } from "url";

import { AxisScale, FigureKind, renderFigure } from "./figures.js";

class UsageError extends Error {}

interface CliArgs {
  inputs: string[];
  kind: string | null;
  out: string | null;
  strategies: string[] | null;
  scale: string | null;
  medians: string | null;
}

const FLAGS = ["--input", "--kind", "--out", "--strategy", "--scale", "--medians"];

export function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = {
    inputs: [],
    kind: null,
    out: null,
    strategies: null,
    scale: null,
    medians: null,
  };
  let i = 0;
  while (i < argv.length) {
    const flag = argv[i];
    if (!FLAGS.includes(flag)) {
      throw new UsageError(`unknown argument ${JSON.stringify(flag)}`);
    }
    const value = argv[i + 1];
    if (value === undefined) {
      throw new UsageError(`${flag} needs a value`);
    }
    switch (flag) {
      case "--input":
        args.inputs.push(value);
        break;
      case "--kind":
        args.kind = value;
        break;
      case "--out":
        args.out = value;
        break;
      case "--strategy":
        args.strategies = value.split(",").map((s) => s.trim()).filter((s) => s !== "");
        break;
      case "--scale":
        args.scale = value;
        break;
      case "--medians":
        args.medians = value;
        break;
    }
    i += 2;
  }
  return args;
}

export async function run(argv: string[]): Promise<number> {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
    if (args.inputs.length === 0) throw new UsageError("plot needs at least one --input");
    if (args.kind == null) throw new UsageError("plot needs --kind");
  } catch (exc) {
    if (exc instanceof UsageError) {
      console.error(`usage error: ${exc.message}`);
      return 1;
    }
    throw exc;
  }
  try {
    const paths = await renderFigure({
      kind: args.kind as FigureKind,
      inputs: args.inputs,
      outBase: args.out ?? args.kind,
      strategies: args.strategies,
      scale: args.scale as AxisScale | null,
      medians: args.medians,
    });
    console.log(`wrote ${paths.join(" and ")}`);
    return 0;
  } catch (exc) {
    console.error(`error: ${exc instanceof Error ? exc.message : String(exc)}`);
    return 2;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;

if (invokedDirectly) {
  run(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
