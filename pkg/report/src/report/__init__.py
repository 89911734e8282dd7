"""Batch figure renderer for qelm run directories.

The workbench writes versioned CSV tables plus a manifest into each run
directory; this package turns them into publication plots. It never
computes metrics itself and never imports the workbench: the CSV schemas
are the entire contract between the two sides.
"""
from .figures import KINDS, FigureSpec, build_figure, render
from .tables import SCHEMAS, Table, read_table

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "KINDS",
    "SCHEMAS",
    "Table",
    "build_figure",
    "read_table",
    "render",
]
