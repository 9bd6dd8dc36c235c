"""Standalone writer for the .mlhf interchange format.

Per-frame binary layout, little-endian: magic ``MLHF``, u32 version = 1,
u32 layer count, then per layer u32 M, N, D followed by M*N*D IEEE-754
32-bit floats in row-major (m, n, d) order, d fastest. This implementation
is deliberately independent of the tracking library's parser; the two meet
only at the documented byte layout.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"MLHF"
VERSION = 1


def frame_filename(frame_index: int) -> str:
    return f"{frame_index:08d}.mlhf"


def write_mlhf(path, layers) -> None:
    """Write feature maps ((M, N, D) arrays, channels last) as one file."""
    chunks = [struct.pack("<4sII", MAGIC, VERSION, len(layers))]
    for layer in layers:
        a = np.ascontiguousarray(layer, dtype="<f4")
        if a.ndim != 3:
            raise ValueError(f"layer must be (M, N, D), got {a.shape}")
        m, n, d = a.shape
        chunks.append(struct.pack("<III", m, n, d))
        chunks.append(a.tobytes())
    Path(path).write_bytes(b"".join(chunks))
