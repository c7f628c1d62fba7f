"""Matplotlib rendering of the loaded plot data.

Each renderer writes a PNG and returns the numeric arrays it actually
drew, so tests can check the extracted plot data instead of pixels.
Rendering is deterministic given the inputs: fixed figure geometry, fixed
styles, no timestamps.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .plotdata import (
    KIND_QUANTILES,
    ErrorCurves,
    FanData,
    LevelSetData,
    suboptimality_bound,
)

Array = np.ndarray

FAN_CEILING_FACTOR = 1.5
LEVELSET_CONTOURS = 12
_OVERLAY_COLORS = ("tab:blue", "tab:orange", "tab:red", "tab:green", "tab:purple")
_METHOD_STYLES = {"optimal": "-", "naive": "--"}


class FanRender(NamedTuple):
    """What render_fan drew: clipped curves plus the clipping ceiling."""

    kn: Array
    curves: Array        # same shape as the input curves, inf replaced by ceiling
    clipped: Array       # boolean mask of replaced entries
    ceiling: float
    band_count: int
    bound: Optional[Array]


def _finite_ceiling(curves: Array, default: float = 10.0) -> float:
    finite = curves[np.isfinite(curves)]
    if finite.size == 0:
        return default
    return float(finite.max()) * FAN_CEILING_FACTOR


def render_fan(fan: FanData, out_path, bound: Optional[tuple[int, float]] = None) -> FanRender:
    """Log-log fan of suboptimality curves with optional reference bound.

    Quantile files get shaded bands between symmetric levels and a bold
    median; repetition files get one line per run.  Unbounded (+inf)
    values are clipped to the axis top and marked.
    """
    ceiling = _finite_ceiling(fan.curves)
    clipped = ~np.isfinite(fan.curves)
    curves = np.where(clipped, ceiling, fan.curves)

    bound_curve = None
    if bound is not None:
        d, p = bound
        bound_curve = suboptimality_bound(fan.kn, int(d), float(p))

    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    pairs = fan.band_pairs()
    for depth, (lo, hi) in enumerate(pairs):
        ax.fill_between(
            fan.kn,
            curves[lo],
            curves[hi],
            color="tab:blue",
            alpha=0.10 + 0.08 * depth,
            linewidth=0.0,
        )
    mid = fan.median_index()
    if fan.kind == KIND_QUANTILES:
        lines = [mid] if mid is not None else []
    else:
        lines = list(range(fan.n_curves))
    for i in lines:
        label = "median" if fan.kind == KIND_QUANTILES else f"run {int(fan.keys[i])}"
        ax.plot(fan.kn, curves[i], color="tab:blue", linewidth=1.8, label=label)
        if clipped[i].any():
            ax.plot(
                fan.kn[clipped[i]],
                curves[i][clipped[i]],
                linestyle="none",
                marker="^",
                color="tab:red",
                markersize=5,
                label="unbounded" if i == lines[0] else None,
            )
    if bound_curve is not None:
        shown = np.minimum(bound_curve, ceiling)
        ax.plot(fan.kn, shown, color="black", linestyle="--", linewidth=1.2, label="bound")

    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_ylim(top=ceiling)
    ax.set_xlabel("weighted samples kn")
    ax.set_ylabel("suboptimality factor")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="upper right", fontsize=9)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return FanRender(fan.kn, curves, clipped, ceiling, len(pairs), bound_curve)


class CDRender(NamedTuple):
    """What render_cd drew: contour levels and the overlay curves."""

    contour_levels: Array
    x: Array
    y: Array
    overlay_names: tuple[str, ...]
    overlay: Array


def render_cd(data: LevelSetData, out_path) -> CDRender:
    """Grayscale log-level sets with the overlay curves on top.

    A constant matrix degenerates to a single level band, i.e. a uniform
    background.
    """
    logs = np.log10(data.values)
    lo, hi = float(logs.min()), float(logs.max())
    if hi - lo < 1e-12:
        levels = np.array([lo - 0.5, lo + 0.5])
    else:
        levels = np.linspace(lo, hi, LEVELSET_CONTOURS + 1)

    fig, ax = plt.subplots(figsize=(7.0, 5.6))
    # transpose: values[i, j] sits at (x[i], y[j]) but contourf wants Z[j, i]
    cs = ax.contourf(data.x, data.y, logs.T, levels=levels, cmap="Greys")
    fig.colorbar(cs, ax=ax, label="log10 level")
    for j, name in enumerate(data.overlay_names):
        ax.plot(
            data.x,
            data.overlay[:, j],
            color=_OVERLAY_COLORS[j % len(_OVERLAY_COLORS)],
            linewidth=1.6,
            label=name,
        )
    ax.set_xlim(data.x[0], data.x[-1])
    ax.set_ylim(data.y[0], data.y[-1])
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(loc="upper left", fontsize=9)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return CDRender(levels, data.x, data.y, data.overlay_names, data.overlay)


class ErrorRender(NamedTuple):
    """What render_errors drew: the median curves per target and method."""

    n: Array
    targets: tuple[str, ...]
    methods: tuple[str, ...]
    medians: Array


def render_errors(curves: ErrorCurves, out_path) -> ErrorRender:
    """Log-log error curves: faint individual runs, bold per-group median."""
    cmap = plt.get_cmap("tab10")
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for t, target in enumerate(curves.targets):
        color = cmap(t % 10)
        for m, method in enumerate(curves.methods):
            style = _METHOD_STYLES.get(method, ":")
            for r in range(curves.rep_values.shape[2]):
                ax.plot(
                    curves.n,
                    np.maximum(curves.rep_values[t, m, r], 1e-300),
                    linestyle=style,
                    color=color,
                    alpha=0.2,
                    linewidth=0.8,
                )
            ax.plot(
                curves.n,
                np.maximum(curves.medians[t, m], 1e-300),
                linestyle=style,
                color=color,
                linewidth=1.8,
                label=f"{target} ({method})",
            )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("sample count n")
    ax.set_ylabel("relative error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8, ncols=2)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return ErrorRender(curves.n, curves.targets, curves.methods, curves.medians)
