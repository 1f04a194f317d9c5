"""Figure rendering for ordkl output files.

Pure presentation: this package parses the CSV/JSON files the simulation CLI
emits and turns them into images.  It never computes physics and does not
depend on the simulation package.
"""

__version__ = "0.1.0"

#: bump when any visual choice changes; rendered bytes are stable per version.
STYLE_VERSION = "1"

#: data schema this renderer understands.
KNOWN_SCHEMA_VERSIONS = ("1",)

from .io import SchemaError, read_envelope, read_table
from .render import FigureJob, render

__all__ = [
    "STYLE_VERSION",
    "KNOWN_SCHEMA_VERSIONS",
    "SchemaError",
    "FigureJob",
    "read_envelope",
    "read_table",
    "render",
]
