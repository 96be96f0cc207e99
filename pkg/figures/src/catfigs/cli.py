"""render-figs: turn a kerrcat sweep directory into figure files.

    render-figs <sweep-dir> --style fig2 --out wigner_grid.svg
    render-figs <sweep-dir> --style fig3 --out marginals.svg

fig2 draws the Wigner heatmap grid from a sweep over epsilon (rows) and s
(columns); fig3 draws the lettered marginal-oscillation panels with regime
columns and one row per remaining axis combination.  Override the layout
with --rows/--cols (comma-separated axis names).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bundles import BundleError, load_index
from .render import FigureSpec, render_marginals, render_wigner_panels

_META_COLUMNS = {"config_hash", "negativity", "detection_probability"}


def _remaining_axes(sweep_dir: Path, used: set[str]) -> tuple[str, ...]:
    rows = load_index(sweep_dir)
    axes = tuple(k for k in rows[0] if k not in _META_COLUMNS and k not in used)
    if not axes:
        raise BundleError("sweep index has no free axes left for panel rows")
    return axes


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="render-figs", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("sweep_dir", type=Path)
    parser.add_argument("--style", choices=("fig2", "fig3"), required=True)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--rows", help="comma-separated sweep axes for panel rows")
    parser.add_argument("--cols", help="comma-separated sweep axes for panel columns")
    parser.add_argument("--vlim", type=float, help="fixed color-scale limit (fig2)")
    args = parser.parse_args(argv)

    try:
        if args.style == "fig2":
            rows = tuple((args.rows or "epsilon").split(","))
            cols = tuple((args.cols or "s").split(","))
            renderer = render_wigner_panels
        else:
            cols = tuple((args.cols or "regime").split(","))
            rows = tuple(args.rows.split(",")) if args.rows else \
                _remaining_axes(args.sweep_dir, set(cols))
            renderer = render_marginals
        spec = FigureSpec(sweep_dir=args.sweep_dir, out_path=args.out,
                          row_axes=rows, col_axes=cols, vlim=args.vlim)
        out = renderer(spec)
    except BundleError as exc:
        print(f"bundle error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
