"""Shared matplotlib defaults for the report figures."""

import matplotlib

RC_PARAMS = {
    "figure.figsize": (6.0, 4.2),
    "figure.dpi": 110,
    "savefig.bbox": "tight",
    "font.size": 11,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "lines.linewidth": 1.6,
    "lines.markersize": 5.5,
}

STRATEGY_COLORS = {
    "case1": "#d95f02",
    "case2": "#1b9e77",
    "dense-gaussian": "#7570b3",
}
STRATEGY_MARKERS = {"case1": "o", "case2": "s", "dense-gaussian": "^"}
GUIDELINE_COLOR = "#888888"
FIELD_CMAP = "viridis"


def apply() -> None:
    """Install the shared defaults; headless-safe backend."""
    matplotlib.use("Agg", force=False)
    matplotlib.rcParams.update(RC_PARAMS)
