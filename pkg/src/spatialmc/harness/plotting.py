"""Static SVG panels: mean (SD) MSE against MCAR level, one file per preset."""

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

# (method, summary prefix, label, colour)
SERIES = [
    ("lrmc", "mse_missing", "LRMC, missing entries", "black"),
    ("smc", "mse_missing", "SMC, missing entries", "red"),
    ("smc", "mse_new", "SMC, new locations", "blue"),
]


def plot_panel(summary, preset, path):
    """Draw one preset's three series with SD error bars and save as SVG."""
    recs = [r for r in summary if r["preset"] == preset]
    fig = Figure(figsize=(5, 4))
    FigureCanvasSVG(fig)
    ax = fig.add_subplot()
    offsets = np.linspace(-0.004, 0.004, len(SERIES))
    drawn = False
    for (method, prefix, label, colour), dx in zip(SERIES, offsets):
        pts = sorted((r["mcar_level"], r[f"{prefix}_mean"], r[f"{prefix}_sd"])
                     for r in recs if r["method"] == method)
        pts = [p for p in pts if not np.isnan(p[1])]
        if not pts:
            continue
        lv, mean, sd = (np.array(c, dtype=float) for c in zip(*pts))
        ax.errorbar(lv + dx, mean, yerr=np.nan_to_num(sd), color=colour, marker="o",
                    markersize=3, capsize=2, linewidth=1, label=label)
        drawn = True
    scenario = recs[0]["scenario"] if recs else ""
    ax.set_title(f"{preset} (scenario {scenario})")
    ax.set_xlabel("MCAR level")
    ax.set_ylabel("MSE")
    if drawn:
        ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": "spatialmc", "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return Path(path)


def plot_report(summary, outdir):
    outdir = Path(outdir)
    presets = sorted({r["preset"] for r in summary})
    return [plot_panel(summary, p, outdir / f"{p}.svg") for p in presets]
