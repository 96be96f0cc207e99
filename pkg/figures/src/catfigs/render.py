"""Figure rendering: Wigner heatmap grids and marginal-oscillation panels.

Thin consumers of the CSV bundles; no physics is recomputed here.  Output is
deterministic SVG (fixed hash salt, no date metadata), so re-rendering the
same bundle yields byte-identical files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .bundles import (BundleError, bundle_for, load_index, load_marginal,
                      load_wigner)

_SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def _deterministic_rc():
    plt.rcParams["svg.hashsalt"] = "catfigs"


@dataclass(frozen=True)
class FigureSpec:
    """Panel layout over a sweep directory.

    row_axes/col_axes name sweep axes (one or several; several produce one
    panel row/column per value combination present in the index).  vlim pins
    the shared color scale; None derives it from the data."""

    sweep_dir: Path
    out_path: Path
    row_axes: tuple[str, ...]
    col_axes: tuple[str, ...]
    vlim: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "row_axes", _as_axes(self.row_axes))
        object.__setattr__(self, "col_axes", _as_axes(self.col_axes))
        if not self.row_axes or not self.col_axes:
            raise BundleError("row_axes and col_axes must name at least one axis")


def _as_axes(axes) -> tuple[str, ...]:
    if isinstance(axes, str):
        return (axes,)
    return tuple(axes)


def _is_number(v) -> bool:
    try:
        float(v)
        return True
    except (TypeError, ValueError):
        return False


def _sort_key(value: str):
    return (0, float(value), "") if _is_number(value) else (1, 0.0, value)


def _combo_values(rows, axes: tuple[str, ...]) -> list[tuple[str, ...]]:
    for ax in axes:
        if ax not in rows[0]:
            raise BundleError(f"sweep index has no axis {ax!r} "
                              f"(columns: {sorted(rows[0])})")
    combos = {tuple(r[ax] for ax in axes) for r in rows}
    return sorted(combos, key=lambda c: tuple(_sort_key(v) for v in c))


def _select(rows, row_axes, col_axes, rv, cv):
    cand = [r for r in rows
            if tuple(r[ax] for ax in row_axes) == rv
            and tuple(r[ax] for ax in col_axes) == cv]
    if len(cand) != 1:
        raise BundleError(
            f"selection {dict(zip(row_axes, rv))} x {dict(zip(col_axes, cv))} "
            f"matched {len(cand)} bundles, expected exactly 1"
        )
    return cand[0]


def _label(axes, values) -> str:
    return ", ".join(f"{a}={v}" for a, v in zip(axes, values))


def render_wigner_panels(spec: FigureSpec) -> Path:
    """Heatmap grid of W(x, p) with a diverging colormap centered at zero so
    negative regions stand out; all panels share one color scale."""
    _deterministic_rc()
    rows = load_index(spec.sweep_dir)
    row_vals = _combo_values(rows, spec.row_axes)
    col_vals = _combo_values(rows, spec.col_axes)
    panels = {}
    vmax = spec.vlim or 0.0
    for rv in row_vals:
        for cv in col_vals:
            sel = _select(rows, spec.row_axes, spec.col_axes, rv, cv)
            data = load_wigner(bundle_for(spec.sweep_dir, sel))
            panels[(rv, cv)] = data
            if spec.vlim is None:
                vmax = max(vmax, float(np.abs(data.w).max()))
    nr, nc = len(row_vals), len(col_vals)
    fig, axes = plt.subplots(nr, nc, figsize=(3.0 * nc + 1.2, 2.6 * nr),
                             squeeze=False, constrained_layout=True)
    im = None
    for i, rv in enumerate(row_vals):
        for j, cv in enumerate(col_vals):
            ax = axes[i][j]
            d = panels[(rv, cv)]
            im = ax.pcolormesh(d.x, d.p, d.w.T, cmap="RdBu_r",
                               vmin=-vmax, vmax=vmax, rasterized=True)
            ax.set_title(_label(spec.row_axes, rv) + ", "
                         + _label(spec.col_axes, cv), fontsize=8)
            ax.set_aspect("equal")
            if i == nr - 1:
                ax.set_xlabel("x")
            if j == 0:
                ax.set_ylabel("p")
    fig.colorbar(im, ax=[a for r in axes for a in r], label="W(x, p)", shrink=0.8)
    out = Path(spec.out_path)
    fig.savefig(out, **_SAVE_KW)
    plt.close(fig)
    return out


def render_marginals(spec: FigureSpec) -> Path:
    """Line plots of the imaginary cross-term marginal against x, one panel
    per (row, column) combination, lettered column-major so the left column
    (first regime) reads A..D and the right column E..H."""
    _deterministic_rc()
    rows = load_index(spec.sweep_dir)
    row_vals = _combo_values(rows, spec.row_axes)
    col_vals = _combo_values(rows, spec.col_axes)
    nr, nc = len(row_vals), len(col_vals)
    fig, axes = plt.subplots(nr, nc, figsize=(3.6 * nc, 1.9 * nr),
                             squeeze=False, constrained_layout=True)
    letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    k = 0
    for j, cv in enumerate(col_vals):
        for i, rv in enumerate(row_vals):
            ax = axes[i][j]
            sel = _select(rows, spec.row_axes, spec.col_axes, rv, cv)
            marg = load_marginal(bundle_for(spec.sweep_dir, sel))
            ax.plot(marg.x, marg.im_cross, lw=1.0, color="tab:blue")
            ax.axhline(0.0, lw=0.5, color="0.6")
            ax.set_title(f"({letters[k]})  " + _label(spec.row_axes, rv) + ", "
                         + _label(spec.col_axes, cv), fontsize=8, loc="left")
            k += 1
            if i == nr - 1:
                ax.set_xlabel("x")
            if j == 0:
                ax.set_ylabel(r"Im $\int W\,dp$")
    out = Path(spec.out_path)
    fig.savefig(out, **_SAVE_KW)
    plt.close(fig)
    return out
