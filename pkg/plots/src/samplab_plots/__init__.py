"""Figure rendering for samplab's persisted reports."""

from .render import FIGURE_KINDS, FigureSpec, RenderError, RenderResult, render

__version__ = "0.1.0"

__all__ = ["FIGURE_KINDS", "FigureSpec", "RenderError", "RenderResult",
           "render", "__version__"]
