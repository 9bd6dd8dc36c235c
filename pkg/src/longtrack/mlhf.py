"""Deep-feature interchange files (.mlhf).

Per-frame binary layout, little-endian:
    magic   4 bytes  b"MLHF"
    version u32      1
    count   u32      number of layers L
    then per layer:
    M, N, D u32 x 3  rows, columns, channels
    data    M*N*D    IEEE-754 32-bit floats, row-major (m, n, d), d fastest

Files are named ``<frame_index:08d>.mlhf`` inside a feature directory;
frame indices are 1-based.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

MAGIC = b"MLHF"
VERSION = 1
_HEADER = struct.Struct("<4sII")
_LAYER_HEADER = struct.Struct("<III")


def frame_filename(frame_index: int) -> str:
    return f"{frame_index:08d}.mlhf"


def write_layers(path, layers) -> None:
    """Write feature maps ((M, N, D) arrays) as one .mlhf file."""
    chunks = [_HEADER.pack(MAGIC, VERSION, len(layers))]
    for layer in layers:
        a = np.ascontiguousarray(layer, dtype="<f4")
        if a.ndim != 3:
            raise FormatError(f"layer must be (M, N, D), got shape {a.shape}")
        m, n, d = a.shape
        chunks.append(_LAYER_HEADER.pack(m, n, d))
        chunks.append(a.tobytes())
    Path(path).write_bytes(b"".join(chunks))


def read_layers(path) -> list[np.ndarray]:
    """Parse one .mlhf file into a list of (M, N, D) float32 arrays."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, count = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    offset = _HEADER.size
    layers = []
    for i in range(count):
        if offset + _LAYER_HEADER.size > len(raw):
            raise FormatError(f"{path}: truncated at layer {i} header")
        m, n, d = _LAYER_HEADER.unpack_from(raw, offset)
        offset += _LAYER_HEADER.size
        if m == 0 or n == 0:
            raise FormatError(f"{path}: layer {i} has zero spatial size {m}x{n}")
        if d == 0:
            raise FormatError(f"{path}: layer {i} has zero channels")
        nbytes = m * n * d * 4
        if offset + nbytes > len(raw):
            raise FormatError(f"{path}: truncated in layer {i} data")
        flat = np.frombuffer(raw, dtype="<f4", count=m * n * d, offset=offset)
        layers.append(flat.reshape(m, n, d).copy())
        offset += nbytes
    if offset != len(raw):
        raise FormatError(f"{path}: {len(raw) - offset} trailing bytes")
    return layers
