"""Figure rendering for heatchan result CSVs."""

from .render import FIGURE_KINDS, FigureSpec, SchemaError, build_figure, read_rows, render

__version__ = "0.1.0"
