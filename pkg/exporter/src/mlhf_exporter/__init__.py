"""Offline deep-feature exporter.

Runs a VGG19 over per-frame search windows of a tracking sequence and
writes the three designated convolutional feature maps per frame in the
.mlhf interchange format consumed by the tracking library.
"""

from .export import export_sequence
from .writer import write_mlhf

__version__ = "0.1.0"

__all__ = ["export_sequence", "write_mlhf", "__version__"]
