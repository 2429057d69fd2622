"""Publication-style figure regeneration from simulation output bundles.

Consumes the CSV tables and JSON manifest written by the transport
simulator's batch runner; every input is checksum-verified before a single
artist is drawn.
"""

from .manifest import Bundle, ManifestError, load_manifest
from .render import FIGURE_IDS, FigureJob, Style, render

__version__ = "0.1.0"

__all__ = [
    "Bundle",
    "ManifestError",
    "load_manifest",
    "FIGURE_IDS",
    "FigureJob",
    "Style",
    "render",
]
