"""Figure rendering from sweep CSVs and reconstruction grids.

Five figure kinds: the three synthetic sweeps (error versus r, n, p), the
reconstruction panel grid, and the reconstruction error sweep.  Rendering
is read-only with respect to the data: medians are recomputed from the raw
trial rows and, when a medians sidecar is supplied, must match the stored
values exactly or rendering aborts.  Every figure is written as both PNG
and SVG next to each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from . import plotstyle
from .records import (
    GROUP_KEY,
    medians_by_group,
    read_grid_csv,
    read_medians_json,
    read_sweep_csv,
)

FIGURE_KINDS = ("sweep_r", "sweep_n", "sweep_p", "eit_panels", "eit_sweep")

_AXIS_LABELS = {
    "sweep_r": ("r", "relative error"),
    "sweep_n": ("n", "relative error"),
    "sweep_p": ("p", "relative error"),
    "eit_sweep": ("r", "relative error"),
}
_DEFAULT_SCALE = {
    "sweep_r": "log-log",
    "sweep_n": "linear",
    "sweep_p": "linear",
    "eit_sweep": "log-log",
}


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input files, figure kind, output basename, and options.

    ``inputs`` holds one sweep CSV for the sweep kinds, or the grid CSVs
    (ground truth plus reconstructions) for the panel kind.  ``medians``
    optionally names the stored medians JSON to verify against.
    ``strategies`` restricts sweep curves to a subset; empty subsets are an
    error rather than an empty plot.
    """

    kind: str
    inputs: tuple[str, ...]
    out_base: str
    strategies: tuple[str, ...] | None = None
    scale: str | None = None
    medians: str | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("figure needs at least one input file")
        if self.scale not in (None, "log-log", "linear"):
            raise ValueError(f"unknown axis scale {self.scale!r}")


def _verify_medians(recomputed: list[dict], stored_path: str, kind: str) -> None:
    payload = read_medians_json(stored_path)
    if payload.get("kind") != kind:
        raise ValueError(
            f"medians file is for kind {payload.get('kind')!r}, figure is {kind!r}"
        )
    stored = payload["medians"]
    if len(stored) != len(recomputed):
        raise ValueError("stored medians do not cover the same groups as the raw data")
    key = GROUP_KEY[kind]
    stored_map = {(m["strategy"], m[key]): m["median_rel_error"] for m in stored}
    for group in recomputed:
        want = stored_map.get((group["strategy"], group[key]))
        if want is None or want != group["median_rel_error"]:
            raise ValueError(
                "stored medians disagree with medians recomputed from raw trials "
                f"at {group['strategy']}, {key}={group[key]}"
            )


def _render_sweep(spec: FigureSpec, fig):
    kind = spec.kind
    csv_kind, records = read_sweep_csv(spec.inputs[0])
    if csv_kind != kind:
        raise ValueError(f"input file holds {csv_kind!r} data, figure is {kind!r}")
    groups = medians_by_group(records, kind)
    if spec.medians:
        _verify_medians(groups, spec.medians, kind)

    present = tuple(dict.fromkeys(g["strategy"] for g in groups))
    wanted = spec.strategies if spec.strategies is not None else present
    chosen = [s for s in wanted if s in present]
    if not chosen:
        raise ValueError(
            f"no data for requested strategies {tuple(wanted)}; file has {present}"
        )

    key = GROUP_KEY[kind]
    scale = spec.scale or _DEFAULT_SCALE[kind]
    ax = fig.subplots()
    for strategy in chosen:
        pts = [(g[key], g["median_rel_error"]) for g in groups if g["strategy"] == strategy]
        pts.sort()
        xs = [pt[0] for pt in pts]
        ys = [pt[1] for pt in pts]
        ax.plot(
            xs,
            ys,
            label=strategy,
            color=plotstyle.STRATEGY_COLORS.get(strategy),
            marker=plotstyle.STRATEGY_MARKERS.get(strategy, "o"),
        )
    if scale == "log-log":
        ax.set_xscale("log")
        ax.set_yscale("log")
    if kind == "sweep_r" and scale == "log-log":
        # 1/r reference line anchored at the first plotted point
        all_pts = sorted((g[key], g["median_rel_error"]) for g in groups)
        x0, y0 = all_pts[0]
        xs = [pt[0] for pt in all_pts]
        ax.plot(
            xs,
            [y0 * x0 / x for x in xs],
            linestyle="--",
            color=plotstyle.GUIDELINE_COLOR,
            label="1/r",
        )
    xlabel, ylabel = _AXIS_LABELS[kind]
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()


def _render_panels(spec: FigureSpec, fig):
    grids = [read_grid_csv(path) for path in spec.inputs]
    if len(grids) < 2:
        raise ValueError("panel figure needs the ground truth and reconstructions")
    ncols = 2
    nrows = (len(grids) + ncols - 1) // ncols
    axes = fig.subplots(nrows, ncols, squeeze=False)
    vmin = min(values.min() for _, _, values in grids)
    vmax = max(values.max() for _, _, values in grids)
    image = None
    for idx, (label, nx, values) in enumerate(grids):
        ax = axes[idx // ncols][idx % ncols]
        image = ax.imshow(
            values.reshape(nx, nx),
            origin="lower",
            extent=(0.0, 1.0, 0.0, 1.0),
            vmin=vmin,
            vmax=vmax,
            cmap=plotstyle.FIELD_CMAP,
        )
        ax.set_title(label)
        ax.grid(False)
        ax.set_xticks([])
        ax.set_yticks([])
    for idx in range(len(grids), nrows * ncols):
        axes[idx // ncols][idx % ncols].axis("off")
    fig.colorbar(image, ax=[a for row in axes for a in row], shrink=0.85)


def render(spec: FigureSpec) -> list[Path]:
    """Render one figure; returns the written paths (PNG then SVG)."""
    plotstyle.apply()
    import matplotlib.pyplot as plt

    fig = plt.figure(
        figsize=(8.0, 7.0) if spec.kind == "eit_panels" else None
    )
    try:
        if spec.kind == "eit_panels":
            _render_panels(spec, fig)
        else:
            _render_sweep(spec, fig)
        out_paths = [Path(spec.out_base + ".png"), Path(spec.out_base + ".svg")]
        for path in out_paths:
            fig.savefig(path)
    finally:
        plt.close(fig)
    return out_paths
