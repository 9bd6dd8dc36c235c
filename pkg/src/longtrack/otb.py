"""OTB-style sequence directories and result files.

A sequence directory holds ``img/%04d.jpg`` (or ``.png``) frames, 1-indexed,
plus ``groundtruth_rect.txt`` with one comma- or tab-separated
``x,y,w,h`` row per frame. Results are written as headerless CSV rows
``frame,x,y,w,h,response,redetected,scale``.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .boxes import Box
from .errors import InputError


def frame_paths(seq_dir) -> list[Path]:
    img_dir = Path(seq_dir) / "img"
    if not img_dir.is_dir():
        raise InputError(f"missing img/ directory under {seq_dir}")
    paths = sorted(p for p in img_dir.iterdir()
                   if p.suffix.lower() in (".jpg", ".jpeg", ".png"))
    if not paths:
        raise InputError(f"no frames found in {img_dir}")
    return paths


def load_frame(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def iter_frames(seq_dir):
    for path in frame_paths(seq_dir):
        yield load_frame(path)


def read_rects(path) -> list[tuple[float, float, float, float]]:
    """Parse x,y,w,h rows separated by commas, tabs or whitespace."""
    rows = []
    text = Path(path).read_text()
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = re.split(r"[,\t ]+", line)
        if len(parts) < 4:
            raise InputError(f"{path}:{line_no}: expected x,y,w,h, got {line!r}")
        rows.append(tuple(float(v) for v in parts[:4]))
    return rows


def write_rects(path, rects) -> None:
    with open(path, "w") as fh:
        for rect in rects:
            fh.write(",".join(f"{v:g}" for v in rect) + "\n")


def groundtruth_path(seq_dir) -> Path:
    return Path(seq_dir) / "groundtruth_rect.txt"


def save_sequence(seq_dir, frames, boxes, hidden=None) -> None:
    """Write frames as img/%04d.png plus groundtruth_rect.txt."""
    seq_dir = Path(seq_dir)
    img_dir = seq_dir / "img"
    img_dir.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames, start=1):
        Image.fromarray(frame).save(img_dir / f"{i:04d}.png")
    write_rects(groundtruth_path(seq_dir),
                [box.as_tuple() for box in boxes])


def write_results(path, boxes, diagnostics) -> None:
    """One row per frame: frame,x,y,w,h,response,redetected,scale."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for box, diag in zip(boxes, diagnostics):
            writer.writerow([diag.frame_index,
                             f"{box.x:.4f}", f"{box.y:.4f}",
                             f"{box.w:.4f}", f"{box.h:.4f}",
                             f"{diag.response:.6f}",
                             int(diag.redetected),
                             f"{diag.scale:.6f}"])


def read_results(path):
    """Rows of (frame, box, response, redetected, scale)."""
    rows = []
    with open(path, newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) < 8:
                raise InputError(f"{path}:{line_no}: expected 8 columns, got {len(row)}")
            rows.append((int(row[0]),
                         Box(float(row[1]), float(row[2]),
                             float(row[3]), float(row[4])),
                         float(row[5]), bool(int(row[6])), float(row[7])))
    if not rows:
        raise InputError(f"{path}: no result rows")
    return rows


def boxes_from_results(rows) -> list[tuple[float, float, float, float]]:
    return [row[1].as_tuple() for row in rows]
