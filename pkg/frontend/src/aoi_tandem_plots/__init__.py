"""Rendering of age-of-information sweep CSVs into publication-style
panels.  Consumes the experiment CLI's CSV output only; no statistics are
recomputed here."""

__version__ = "0.1.0"

from .render import (  # noqa: F401
    NothingToPlotError,
    PlotSpec,
    RenderInfo,
    SchemaError,
    render,
)
