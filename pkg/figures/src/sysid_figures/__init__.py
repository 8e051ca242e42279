"""Display-only companion to the ``linsysid`` experiment harness.

Reads the harness CSV (one row per sweep point and trial, plus an
aggregated row per point) and renders each figure family as an image
file.  No error or bound is ever recomputed here; whatever the CSV says
is what gets plotted.
"""

from . import loader, render

__all__ = ["loader", "render"]

__version__ = "0.1.0"
