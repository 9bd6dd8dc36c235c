"""Long-term single-target visual tracking.

Multi-layer kernelized correlation filters for translation, an incremental
SVM detector whose proposals are filtered by a GM-PHD mixture for
occlusion recovery, correlation-filter scale estimation, and an OTB-style
one-pass-evaluation harness.
"""

from .boxes import Box, from_center, iou
from .tracker import TrackerConfig, TrackerState, initialize, run_sequence, step

__version__ = "0.1.0"

__all__ = [
    "Box",
    "from_center",
    "iou",
    "TrackerConfig",
    "TrackerState",
    "initialize",
    "run_sequence",
    "step",
    "__version__",
]
