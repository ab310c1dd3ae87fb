"""Report figures: commanded vs. achieved paths and error traces.

Rendered headless (Agg) to PNG files next to the delimited report output.
Path panels show the stylus-commanded trajectory and the end-effector
trajectory side by side in two projections, colored by progress through
the trial.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .metrics import TrackingReport, _engaged_pairs
from .sim import SimFrame


def _colored_path(ax, xs, ys, label_start=False):
    pts = np.arange(len(xs))
    sc = ax.scatter(xs, ys, c=pts / max(len(xs) - 1, 1), cmap="viridis",
                    s=6, linewidths=0)
    ax.plot(xs, ys, color="0.75", linewidth=0.5, zorder=0)
    return sc


def plot_paths(frames: Sequence[SimFrame], module: str,
               out_path: str | Path) -> Path:
    """Commanded path (left) vs. achieved path (right), two projections."""
    expected, achieved, times, _ = _engaged_pairs(list(frames), module)
    fig, axes = plt.subplots(2, 2, figsize=(9, 8))
    panels = [("commanded", expected), ("achieved", achieved)]
    projections = [("x", "y", 0, 1), ("x", "z", 0, 2)]
    for col, (title, path) in enumerate(panels):
        for row, (nx, ny, ix, iy) in enumerate(projections):
            ax = axes[row][col]
            if path.shape[0]:
                sc = _colored_path(ax, path[:, ix], path[:, iy])
            ax.set_xlabel(f"{nx} (mm)")
            ax.set_ylabel(f"{ny} (mm)")
            ax.set_title(f"{module} {title} ({nx}-{ny})")
            ax.set_aspect("equal", adjustable="datalim")
            ax.grid(True, linewidth=0.3, alpha=0.5)
    fig.colorbar(sc, ax=axes, fraction=0.03, pad=0.02,
                 label="trial progress (t=0 dark, t=1 bright)")
    out = Path(out_path)
    fig.savefig(out, dpi=130)
    plt.close(fig)
    return out


def plot_errors(frames: Sequence[SimFrame], module: str,
                report: TrackingReport, out_path: str | Path) -> Path:
    """Position error over the engaged interval, with per-axis breakdown."""
    expected, achieved, times, _ = _engaged_pairs(list(frames), module)
    err = achieved - expected
    dist = np.linalg.norm(err, axis=1)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    ax1.plot(times, dist, linewidth=0.9)
    ax1.axhline(report.rms_position_error, color="tab:orange",
                linestyle="--", linewidth=0.8,
                label=f"RMS {report.rms_position_error:.4f} mm")
    ax1.set_ylabel("position error (mm)")
    ax1.legend(loc="upper right")
    ax1.grid(True, linewidth=0.3, alpha=0.5)
    for i, axis in enumerate("xyz"):
        ax2.plot(times, err[:, i], linewidth=0.8, label=axis)
    ax2.set_xlabel("t (s)")
    ax2.set_ylabel("per-axis error (mm)")
    ax2.legend(loc="upper right")
    ax2.grid(True, linewidth=0.3, alpha=0.5)
    fig.suptitle(f"{module} tracking error")
    out = Path(out_path)
    fig.savefig(out, dpi=130)
    plt.close(fig)
    return out


def render_report_figures(frames: Sequence[SimFrame], module: str,
                          report: TrackingReport,
                          out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        plot_paths(frames, module, out_dir / f"{module}_paths.png"),
        plot_errors(frames, module, report,
                    out_dir / f"{module}_errors.png"),
    ]
