"""Matplotlib renderings of run and sweep outputs.

Figures are drawn on :class:`matplotlib.figure.Figure` objects directly so
nothing touches pyplot's global state; this keeps the CLI usable headless.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib import rc_context, rcParams
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}

# fixed metadata so re-rendering the same data yields the same bytes
_PNG_META = {"Software": None}


def _save(fig: Figure, path: Path) -> Path:
    FigureCanvasAgg(fig)
    fig.savefig(path, metadata=_PNG_META)
    return path


def _ratio_label(ratio: float) -> str:
    return "inf" if math.isinf(ratio) else f"{ratio:g}"


def _last_change(summary) -> int:
    """Index after which all three band curves stay constant."""
    stacked = np.vstack([summary.band_q1, summary.band_median, summary.band_q3])
    moving = np.flatnonzero(np.any(np.diff(stacked, axis=1) != 0, axis=0))
    return int(moving[-1]) + 1 if moving.size else 0


def plot_run_series(fraction_series: Sequence[float], path, threshold: float = 0.9, title: str = "") -> Path:
    with rc_context(STYLE):
        fig = Figure(figsize=(4.0, 2.6), layout="constrained")
        ax = fig.add_subplot()
        ax.plot(np.arange(len(fraction_series)), 100.0 * np.asarray(fraction_series), lw=1.2)
        for y in (100.0 * threshold, 100.0 * (1.0 - threshold)):
            ax.axhline(y, color="0.6", lw=0.8, ls="--")
        ax.set_ylim(-2, 102)
        ax.set_xlabel("time step")
        ax.set_ylabel("robots with opinion 1 (%)")
        if title:
            ax.set_title(title)
        return _save(fig, Path(path))


def plot_bands(summaries, path) -> Path:
    """Median share of feasible opinions per task count, with the interquartile band."""
    with rc_context(STYLE):
        fig = Figure(figsize=(4.5, 3.0), layout="constrained")
        ax = fig.add_subplot()
        cmap = rcParams["axes.prop_cycle"].by_key()["color"]
        for k, s in enumerate(summaries):
            color = cmap[k % len(cmap)]
            steps = np.arange(len(s.band_median))
            ax.fill_between(steps, 100.0 * s.band_q1, 100.0 * s.band_q3, color=color, alpha=0.25, lw=0)
            ax.plot(steps, 100.0 * s.band_median, color=color, lw=1.2, label=f"m={s.m} (n/m={_ratio_label(s.ratio)})")
        last = max(_last_change(s) for s in summaries)
        ax.set_xlim(0, max(10, int(1.15 * last)))
        ax.set_ylim(-2, 102)
        ax.set_xlabel("time step")
        ax.set_ylabel("robots with opinion 1 (%)")
        ax.legend(loc="best", frameon=False)
        return _save(fig, Path(path))


def plot_decisions(summaries, path) -> Path:
    """Stacked bars of decision outcomes against robot-to-task ratio."""
    with rc_context(STYLE):
        fig = Figure(figsize=(4.5, 2.8), layout="constrained")
        ax = fig.add_subplot()
        x = np.arange(len(summaries))
        feas = np.array([s.pct_feasible for s in summaries])
        infeas = np.array([s.pct_infeasible for s in summaries])
        none = np.array([s.pct_no_decision for s in summaries])
        ax.bar(x, feas, color="tab:green", label="feasible")
        ax.bar(x, infeas, bottom=feas, color="tab:red", label="infeasible")
        ax.bar(x, none, bottom=feas + infeas, color="0.75", label="no decision")
        ax.set_xticks(x, [_ratio_label(s.ratio) for s in summaries])
        ax.set_xlabel("robot-to-task ratio n/m")
        ax.set_ylabel("runs (%)")
        ax.set_ylim(0, 100)
        ax.legend(loc="upper center", bbox_to_anchor=(0.5, 1.18), ncol=3, frameon=False)
        return _save(fig, Path(path))

