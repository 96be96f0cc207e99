"""Figure rendering for kerrcat CSV bundles (read-only consumers)."""

__version__ = "0.1.0"

from .bundles import BundleError, load_index, load_marginal, load_wigner
from .render import FigureSpec, render_marginals, render_wigner_panels

__all__ = ["BundleError", "FigureSpec", "load_index", "load_marginal",
           "load_wigner", "render_marginals", "render_wigner_panels"]
