"""Axis-aligned bounding boxes and overlap arithmetic."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError


@dataclass(frozen=True)
class Box:
    """Bounding box with top-left corner (x, y) and size (w, h), in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise InputError(f"box size must be positive, got w={self.w}, h={self.h}")

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


def from_center(cx: float, cy: float, w: float, h: float) -> Box:
    return Box(cx - w / 2.0, cy - h / 2.0, w, h)


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes; 0 when disjoint."""
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def clip_into_frame(box: Box, frame_w: int, frame_h: int) -> Box:
    """Shift the box so it lies inside the frame, shrinking only if larger than it."""
    w = min(box.w, float(frame_w))
    h = min(box.h, float(frame_h))
    x = min(max(box.x, 0.0), frame_w - w)
    y = min(max(box.y, 0.0), frame_h - h)
    return Box(x, y, w, h)


def center_distance(a: Box, b: Box) -> float:
    """Euclidean distance between box centers, in pixels."""
    (ax, ay), (bx, by) = a.center, b.center
    return float(((ax - bx) ** 2 + (ay - by) ** 2) ** 0.5)
