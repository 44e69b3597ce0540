/**
 * Hand-rolled SVG chart primitives: entity escaping, tick placement for
 * linear and log axes, marker glyphs, and a line-chart builder shared by
 * the sweep figures.  No drawing library; output is a plain SVG string.
 */

import {
  AXIS_COLOR,
  GRID_COLOR,
  MarkerShape,
  TEXT_COLOR,
  TICK_TEXT_COLOR,
} from "./style.js";

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Evenly spaced round-number ticks covering [min, max]. */
export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const nice = [1, 2, 5, 10].map((m) => m * mag);
  const step = nice.find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 0.01; v += step) ticks.push(v);
  return ticks;
}

/**
 * Ticks for a log axis over positive [min, max]: powers of ten, with 2x
 * and 5x mantissas filled in when the span covers few decades.
 */
export function logTicks(min: number, max: number): number[] {
  const lo = Math.log10(min);
  const hi = Math.log10(max);
  const decades: number[] = [];
  for (let k = Math.ceil(lo); k <= Math.floor(hi) + 1e-9; k += 1) {
    decades.push(Math.pow(10, k));
  }
  if (decades.length >= 3) return decades;
  const ticks: number[] = [];
  for (let k = Math.floor(lo); k <= Math.floor(hi); k += 1) {
    for (const m of [1, 2, 5]) {
      const v = m * Math.pow(10, k);
      if (v >= min * (1 - 1e-12) && v <= max * (1 + 1e-12)) ticks.push(v);
    }
  }
  return ticks.length >= 2 ? ticks : [min, max];
}

/** Compact tick label; exponent form outside [1e-3, 1e4). */
export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential();
  return String(Number(v.toPrecision(10)));
}

/** One marker glyph centered on (x, y). */
export function markerSvg(
  shape: MarkerShape,
  x: number,
  y: number,
  size: number,
  color: string,
): string {
  const s = size;
  switch (shape) {
    case "circle":
      return `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="${s}" fill="${color}"/>`;
    case "square":
      return `<rect x="${(x - s).toFixed(1)}" y="${(y - s).toFixed(1)}" width="${2 * s}" height="${2 * s}" fill="${color}"/>`;
    case "triangle":
      return (
        `<path d="M ${x.toFixed(1)},${(y - 1.2 * s).toFixed(1)} ` +
        `L ${(x + 1.1 * s).toFixed(1)},${(y + 0.9 * s).toFixed(1)} ` +
        `L ${(x - 1.1 * s).toFixed(1)},${(y + 0.9 * s).toFixed(1)} Z" fill="${color}"/>`
      );
  }
}

/** A single polyline with markers and a legend entry. */
export interface LineSeries {
  xs: number[];
  ys: number[];
  color: string;
  label: string;
  marker?: MarkerShape;
  dash?: string; // stroke-dasharray
  width?: number;
}

export interface LineChartOpts {
  series: LineSeries[];
  xLabel: string;
  yLabel: string;
  logX: boolean;
  logY: boolean;
  title?: string;
}

interface Axis {
  of: (v: number) => number;
  ticks: number[];
}

function makeAxis(
  values: number[],
  log: boolean,
  pixLo: number,
  pixHi: number,
): Axis {
  if (log) {
    const lo = Math.log10(Math.min(...values)) - 0.05;
    const hi = Math.log10(Math.max(...values)) + 0.05;
    const span = hi - lo || 1;
    return {
      of: (v: number) => pixLo + ((Math.log10(v) - lo) / span) * (pixHi - pixLo),
      ticks: logTicks(Math.pow(10, lo), Math.pow(10, hi)),
    };
  }
  const rawLo = Math.min(...values);
  const rawHi = Math.max(...values);
  const pad = (rawHi - rawLo || Math.abs(rawHi) || 1) * 0.05;
  const lo = rawLo - pad;
  const hi = rawHi + pad;
  return {
    of: (v: number) => pixLo + ((v - lo) / (hi - lo)) * (pixHi - pixLo),
    ticks: niceTicks(lo, hi, 6),
  };
}

/**
 * Assemble a line chart as an SVG string.  Points with nonpositive
 * coordinates on a log axis are dropped, as is conventional; a series
 * left empty by that filter is an error.
 */
export function buildLineChart(opts: LineChartOpts): string {
  const W = 700;
  const H = 420;
  const ml = 70;
  const mr = 24;
  const mt = opts.title ? 40 : 24;
  const mb = 52;
  const pw = W - ml - mr;
  const ph = H - mt - mb;

  const kept = opts.series.map((sr) => {
    const pts: Array<[number, number]> = [];
    for (let i = 0; i < sr.xs.length; i += 1) {
      if (opts.logX && sr.xs[i] <= 0) continue;
      if (opts.logY && sr.ys[i] <= 0) continue;
      pts.push([sr.xs[i], sr.ys[i]]);
    }
    if (pts.length === 0) {
      throw new Error(`series ${JSON.stringify(sr.label)} has no drawable points`);
    }
    return { ...sr, pts };
  });

  const allX = kept.flatMap((sr) => sr.pts.map((pt) => pt[0]));
  const allY = kept.flatMap((sr) => sr.pts.map((pt) => pt[1]));
  const xAxis = makeAxis(allX, opts.logX, ml, ml + pw);
  const yAxis = makeAxis(allY, opts.logY, mt + ph, mt);

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  if (opts.title) {
    s += `<text x="${ml}" y="${mt - 16}" font-size="13" font-weight="600" fill="${TEXT_COLOR}">${esc(opts.title)}</text>\n`;
  }
  s += `<defs><clipPath id="plot"><rect x="${ml}" y="${mt}" width="${pw}" height="${ph}"/></clipPath></defs>\n`;

  // Grid
  for (const v of yAxis.ticks) {
    const y = yAxis.of(v);
    s += `<line x1="${ml}" y1="${y.toFixed(1)}" x2="${ml + pw}" y2="${y.toFixed(1)}" stroke="${GRID_COLOR}" stroke-width="0.6"/>\n`;
  }
  for (const v of xAxis.ticks) {
    const x = xAxis.of(v);
    s += `<line x1="${x.toFixed(1)}" y1="${mt}" x2="${x.toFixed(1)}" y2="${mt + ph}" stroke="${GRID_COLOR}" stroke-width="0.6"/>\n`;
  }

  // Series lines, then markers on top
  for (const sr of kept) {
    const pts = sr.pts
      .map((pt) => `${xAxis.of(pt[0]).toFixed(1)},${yAxis.of(pt[1]).toFixed(1)}`)
      .join(" ");
    const dash = sr.dash ? ` stroke-dasharray="${sr.dash}"` : "";
    s += `<polyline clip-path="url(#plot)" fill="none" stroke="${sr.color}" stroke-width="${sr.width ?? 1.6}"${dash} points="${pts}"/>\n`;
    if (sr.marker) {
      for (const pt of sr.pts) {
        s += markerSvg(sr.marker, xAxis.of(pt[0]), yAxis.of(pt[1]), 3.2, sr.color) + "\n";
      }
    }
  }

  // Axes frame: left and bottom spines only
  s += `<line x1="${ml}" y1="${mt}" x2="${ml}" y2="${mt + ph}" stroke="${AXIS_COLOR}" stroke-width="0.8"/>\n`;
  s += `<line x1="${ml}" y1="${mt + ph}" x2="${ml + pw}" y2="${mt + ph}" stroke="${AXIS_COLOR}" stroke-width="0.8"/>\n`;

  // X ticks + label
  for (const v of xAxis.ticks) {
    const x = xAxis.of(v);
    s += `<line x1="${x.toFixed(1)}" y1="${mt + ph}" x2="${x.toFixed(1)}" y2="${mt + ph + 4}" stroke="${AXIS_COLOR}" stroke-width="0.6"/>\n`;
    s += `<text x="${x.toFixed(1)}" y="${mt + ph + 16}" text-anchor="middle" font-size="10" fill="${TICK_TEXT_COLOR}">${esc(fmtTick(v))}</text>\n`;
  }
  s += `<text x="${ml + pw / 2}" y="${H - 10}" text-anchor="middle" font-size="12" fill="${TEXT_COLOR}">${esc(opts.xLabel)}</text>\n`;

  // Y ticks + label
  for (const v of yAxis.ticks) {
    const y = yAxis.of(v);
    s += `<line x1="${ml - 4}" y1="${y.toFixed(1)}" x2="${ml}" y2="${y.toFixed(1)}" stroke="${AXIS_COLOR}" stroke-width="0.6"/>\n`;
    s += `<text x="${ml - 7}" y="${(y + 3.5).toFixed(1)}" text-anchor="end" font-size="10" fill="${TICK_TEXT_COLOR}">${esc(fmtTick(v))}</text>\n`;
  }
  s += `<text x="16" y="${mt + ph / 2}" text-anchor="middle" font-size="12" fill="${TEXT_COLOR}" transform="rotate(-90,16,${mt + ph / 2})">${esc(opts.yLabel)}</text>\n`;

  // Legend, top-right inside the plot area
  const legendW = Math.max(...opts.series.map((sr) => sr.label.length)) * 6.2 + 34;
  const legendH = opts.series.length * 16 + 8;
  const lx = ml + pw - legendW - 6;
  const ly = mt + 6;
  s += `<rect x="${lx}" y="${ly}" width="${legendW}" height="${legendH}" rx="3" fill="white" fill-opacity="0.85" stroke="${GRID_COLOR}"/>\n`;
  opts.series.forEach((sr, i) => {
    const yMid = ly + 12 + i * 16;
    const dash = sr.dash ? ` stroke-dasharray="${sr.dash}"` : "";
    s += `<line x1="${lx + 6}" y1="${yMid}" x2="${lx + 26}" y2="${yMid}" stroke="${sr.color}" stroke-width="${sr.width ?? 1.6}"${dash}/>\n`;
    if (sr.marker) s += markerSvg(sr.marker, lx + 16, yMid, 3.2, sr.color) + "\n";
    s += `<text x="${lx + 30}" y="${yMid + 3.5}" font-size="10" fill="${TEXT_COLOR}">${esc(sr.label)}</text>\n`;
  });

  s += `</svg>\n`;
  return s;
}
