"""Figure rendering for epblab CSV outputs."""

__version__ = "0.1.0"

from .core import KINDS, FigureSpec, SchemaError, build_figure, load_specs, render, spec_from_dict
