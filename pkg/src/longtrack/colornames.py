"""RGB -> 11-dimensional color-name probability table.

The table maps each of the 32768 quantized RGB bins (5 bits per channel,
index = (R>>3)*1024 + (G>>3)*32 + (B>>3)) to a probability distribution
over the eleven English basic color terms. The shipped asset is generated
by :func:`synthesize_table`: bin centers are converted to CIE LUV and
soft-assigned to named prototype colors with a Gaussian kernel, then
row-normalized.

File layout: 32768 rows x 11 little-endian IEEE-754 32-bit floats,
row-major.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ResourceError
from .features import rgb_to_luv

COLOR_NAMES = ("black", "blue", "brown", "grey", "green", "orange",
               "pink", "purple", "red", "white", "yellow")

_PROTOTYPES: dict[str, tuple[tuple[int, int, int], ...]] = {
    "black": ((0, 0, 0), (25, 25, 25)),
    "blue": ((0, 0, 255), (0, 0, 139), (65, 105, 225), (100, 150, 240)),
    "brown": ((139, 69, 19), (160, 82, 45), (101, 67, 33)),
    "grey": ((128, 128, 128), (169, 169, 169), (90, 90, 90)),
    "green": ((0, 255, 0), (0, 128, 0), (34, 139, 34), (120, 200, 120)),
    "orange": ((255, 165, 0), (255, 140, 0), (230, 120, 40)),
    "pink": ((255, 192, 203), (255, 105, 180), (240, 160, 190)),
    "purple": ((128, 0, 128), (148, 0, 211), (75, 0, 130), (180, 120, 200)),
    "red": ((255, 0, 0), (178, 34, 34), (220, 20, 60)),
    "white": ((255, 255, 255), (235, 235, 235)),
    "yellow": ((255, 255, 0), (255, 215, 0), (240, 230, 80)),
}

TABLE_ROWS = 32768
TABLE_DTYPE = "<f4"


def _luv_natural(rgb01: np.ndarray) -> np.ndarray:
    """LUV in natural units (L 0..100, u/v in their signed ranges)."""
    scaled = rgb_to_luv(rgb01)
    return np.stack([scaled[..., 0] * 100.0,
                     scaled[..., 1] * 354.0 - 134.0,
                     scaled[..., 2] * 262.0 - 140.0], axis=-1)


def quantize_index(rgb: np.ndarray) -> np.ndarray:
    """Table row index of 8-bit RGB values."""
    q = np.asarray(rgb, dtype=np.uint16) >> 3
    return q[..., 0] * 1024 + q[..., 1] * 32 + q[..., 2]


def synthesize_table(tau: float = 28.0) -> np.ndarray:
    """Build the full 32768 x 11 table from the named prototypes."""
    bins = np.arange(32)
    r, g, b = np.meshgrid(bins, bins, bins, indexing="ij")
    centers = np.stack([r, g, b], axis=-1).reshape(-1, 3) * 8.0 + 3.5
    luv = _luv_natural(centers / 255.0)

    scores = np.empty((TABLE_ROWS, len(COLOR_NAMES)))
    for j, name in enumerate(COLOR_NAMES):
        protos = np.asarray(_PROTOTYPES[name], dtype=np.float64)
        pluv = _luv_natural(protos / 255.0)
        d2 = ((luv[:, None, :] - pluv[None, :, :]) ** 2).sum(axis=-1)
        scores[:, j] = np.exp(-d2.min(axis=1) / (2.0 * tau * tau))
    table = scores / scores.sum(axis=1, keepdims=True)
    return table.astype(np.float32)


def save_table(path, table: np.ndarray) -> None:
    np.ascontiguousarray(table, dtype=TABLE_DTYPE).tofile(path)


def default_table_path() -> Path:
    return Path(resources.files("longtrack").joinpath("data/colornames.bin"))


def load_table(path=None) -> np.ndarray:
    """Load a color-name table, validating its size and contents."""
    path = default_table_path() if path is None else Path(path)
    if not path.is_file():
        raise ResourceError(f"color-name table not found: {path}")
    raw = np.fromfile(path, dtype=TABLE_DTYPE)
    if raw.size != TABLE_ROWS * len(COLOR_NAMES):
        raise ResourceError(
            f"{path}: expected {TABLE_ROWS * len(COLOR_NAMES)} floats, "
            f"got {raw.size}")
    table = raw.reshape(TABLE_ROWS, len(COLOR_NAMES)).astype(np.float64)
    if not np.all(np.isfinite(table)) or np.any(table < 0):
        raise ResourceError(f"{path}: table values must be finite and >= 0")
    if np.abs(table.sum(axis=1) - 1.0).max() > 1e-3:
        raise ResourceError(f"{path}: table rows must sum to 1")
    return table
