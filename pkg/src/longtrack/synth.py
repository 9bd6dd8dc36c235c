"""Synthetic test sequences with exact ground truth.

A textured square moves over a noise background; scenarios script pure
translation, per-frame zoom, or a full occlusion window during which a
flickering band hides the target (and the background pans) while its
ground-truth box keeps moving. All randomness comes from one seeded
generator, so sequences are reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxes import Box
from .errors import InputError

SCENARIOS = ("translate", "zoom", "occlude")
DEFAULT_OCCLUSION = (40, 60)   # 1-based inclusive frame window


@dataclass
class SyntheticSequence:
    frames: list[np.ndarray]       # (H, W, 3) uint8
    boxes: list[Box]               # ground truth per frame
    occluded: list[bool]           # True where the target is hidden


def _background(rng: np.random.Generator, size: tuple[int, int]) -> np.ndarray:
    w, h = size
    return rng.integers(96, 160, size=(h, w, 3), dtype=np.uint8)


def _target_patch(coarse: np.ndarray, side: int) -> np.ndarray:
    """Render the target at any size by sampling one continuous random blob
    field (a coarse full-range grid under bilinear interpolation). Smooth
    blobs keep rendering consistent across sizes, and their spatially varying
    gradient orientations make the appearance scale-discriminative."""
    from .features import bilinear_resize
    return np.clip(bilinear_resize(coarse, (side, side)), 0, 255).astype(np.uint8)


def _target_field(rng: np.random.Generator, target_side: int) -> np.ndarray:
    # one blob per HOG cell (4 px): a 4% rescale visibly rearranges cell
    # orientations, which is what makes the scale estimator's levels separable
    cells = max(5, target_side // 4 + 1)
    return rng.uniform(0, 256, size=(cells, cells, 3))


def generate(scenario: str, frames: int = 100, frame_size: tuple[int, int] = (640, 480),
             target_side: int = 40, speed: float = 3.0, zoom_rate: float = 1.02,
             occlusion: tuple[int, int] = DEFAULT_OCCLUSION, noise_sigma: float = 2.0,
             seed: int = 7) -> SyntheticSequence:
    """Build a scripted sequence; see module docstring for the scenarios."""
    if scenario not in SCENARIOS:
        raise InputError(f"unknown scenario {scenario!r}; pick one of {SCENARIOS}")
    if frames < 1:
        raise InputError("need at least one frame")
    rng = np.random.default_rng(seed)
    w, h = frame_size
    background = _background(rng, frame_size)
    field = _target_field(rng, target_side)
    texture = _target_patch(field, target_side).astype(np.float64)

    out_frames: list[np.ndarray] = []
    out_boxes: list[Box] = []
    out_hidden: list[bool] = []
    x0, y0 = 60.0, h / 2.0 - target_side / 2.0
    cx0, cy0 = w / 2.0, h / 2.0

    occluder = None
    scroll = 0
    if scenario == "occlude":
        # a full-width flickering band hides the target's whole path while it
        # is gone, and the background pans slowly, so neither the occluder nor
        # any stale context stays coherent from frame to frame
        margin = int(1.5 * target_side)
        oy0 = max(int(y0) - margin, 0)
        oy1 = min(int(round(y0)) + target_side + margin, h)
        occluder = (0, w, oy0, oy1)
        scroll = 1

    for k in range(1, frames + 1):
        frame = np.roll(background, scroll * (k - 1),
                        axis=1).astype(np.float64)
        if scenario == "zoom":
            side = int(round(target_side * zoom_rate ** (k - 1)))
            patch = _target_patch(field, side).astype(np.float64)
            bx = int(round(cx0 - side / 2.0))
            by = int(round(cy0 - side / 2.0))
            box = Box(bx, by, side, side)
            hidden = False
        else:
            side = target_side
            patch = texture
            bx = int(round(x0 + speed * (k - 1)))
            by = int(round(y0))
            box = Box(bx, by, side, side)
            hidden = (scenario == "occlude"
                      and occlusion[0] <= k <= occlusion[1])
        if bx < 0 or by < 0 or bx + side > w or by + side > h:
            raise InputError(
                f"scripted target leaves the frame at frame {k}; "
                "use fewer frames, a larger frame or a slower target")
        if hidden:
            ox0, ox1, oy0, oy1 = occluder
            frame[oy0:oy1, ox0:ox1] = rng.integers(
                96, 160, size=(oy1 - oy0, ox1 - ox0, 3))
        else:
            frame[by:by + side, bx:bx + side] = patch
        frame += rng.normal(0.0, noise_sigma, size=frame.shape)
        out_frames.append(np.clip(frame, 0, 255).astype(np.uint8))
        out_boxes.append(box)
        out_hidden.append(hidden)
    return SyntheticSequence(out_frames, out_boxes, out_hidden)
