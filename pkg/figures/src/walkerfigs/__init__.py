"""Figure renderer for walkerdense sweep and bounds CSV outputs."""

__version__ = "0.1.0"

from .render import FIGURE_IDS, FigureSpec, SchemaError, build_figure, render
