/**
 * Fixed colors and layout constants shared by every figure.
 *
 * Strategy colors and markers match the library's report figures so the
 * two renderers are visually interchangeable.
 */

export const STRATEGY_COLORS: Record<string, string> = {
  case1: "#d95f02",
  case2: "#1b9e77",
  "dense-gaussian": "#7570b3",
};

export type MarkerShape = "circle" | "square" | "triangle";

export const STRATEGY_MARKERS: Record<string, MarkerShape> = {
  case1: "circle",
  case2: "square",
  "dense-gaussian": "triangle",
};

export const GUIDELINE_COLOR = "#888888";
export const FALLBACK_COLOR = "#333333";
export const AXIS_COLOR = "#333333";
export const GRID_COLOR = "#dddddd";
export const TEXT_COLOR = "#222222";
export const TICK_TEXT_COLOR = "#555555";

// Anchor stops of the sequential field colormap, sampled uniformly on
// [0, 1]; cell colors interpolate linearly between neighboring stops.
export const FIELD_CMAP_STOPS = [
  "#440154", "#48186a", "#472d7b", "#424086", "#3b528b", "#33638d",
  "#2c728e", "#26828e", "#21918c", "#1fa088", "#28ae80", "#3fbc73",
  "#5ec962", "#84d44b", "#addc30", "#d8e219", "#fde725",
];

function hexChannel(hex: string, index: number): number {
  return parseInt(hex.slice(1 + 2 * index, 3 + 2 * index), 16);
}

/** Map t in [0, 1] to a colormap color; out-of-range t is clamped. */
export function fieldColor(t: number): string {
  const clamped = Math.min(1, Math.max(0, t));
  const pos = clamped * (FIELD_CMAP_STOPS.length - 1);
  const lo = Math.min(Math.floor(pos), FIELD_CMAP_STOPS.length - 2);
  const frac = pos - lo;
  const a = FIELD_CMAP_STOPS[lo];
  const b = FIELD_CMAP_STOPS[lo + 1];
  const mix = (i: number) =>
    Math.round(hexChannel(a, i) + frac * (hexChannel(b, i) - hexChannel(a, i)));
  return `rgb(${mix(0)},${mix(1)},${mix(2)})`;
}
