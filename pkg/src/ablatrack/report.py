"""Figure rendering for the analyze path.

One summary PNG per run: recession per station, shock standoff, sample
area and vertical position over time, with the linear fits overlaid.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import LinearFitResult, TimeSeriesBundle


def _plot_channel(ax, t, values, label=None, fit: LinearFitResult | None = None):
    ok = np.isfinite(values)
    (line,) = ax.plot(t[ok], values[ok], ".", ms=3, label=label)
    if fit is not None and ok.sum() >= 2:
        tt = np.array([t[ok].min(), t[ok].max()])
        ax.plot(tt, fit.slope * tt + fit.intercept, "-", lw=1, color=line.get_color(), alpha=0.7)


def render_timeseries_figure(bundle: TimeSeriesBundle, fits: dict[str, LinearFitResult], path) -> Path:
    fig, axes = plt.subplots(2, 2, figsize=(11, 7.5), sharex=True)
    t = bundle.time_s

    ax = axes[0, 0]
    for f in bundle.stations:
        name = f"recession_mm@{f:g}"
        _plot_channel(ax, t, bundle.recession_mm[f], label=f"f={f:g}", fit=fits.get(name))
    ax.set_ylabel("recession [mm]")
    ax.legend(fontsize=7, ncol=2)

    ax = axes[0, 1]
    _plot_channel(ax, t, bundle.shock_standoff_mm, fit=fits.get("standoff_mm"))
    ax.set_ylabel("shock standoff [mm]")

    ax = axes[1, 0]
    _plot_channel(ax, t, bundle.sample_area_mm2, fit=fits.get("area_mm2"))
    ax.set_ylabel("sample area [mm$^2$]")
    ax.set_xlabel("time [s]")

    ax = axes[1, 1]
    _plot_channel(ax, t, bundle.vertical_position_mm, fit=fits.get("vertical_mm"))
    ax.set_ylabel("vertical position [mm]")
    ax.set_xlabel("time [s]")

    for ax in axes.ravel():
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    out = Path(str(path))
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out
