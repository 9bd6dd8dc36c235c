"""Sequence export: crop search windows, run VGG19, write feature files.

Input boxes are target boxes (``frame,x,y,w,h`` CSV rows; extra columns
such as a tracker's response/redetected/scale are ignored), typically a
prior tracking pass's results or ground truth. The search window is 2.8x
the box, rounded to even pixels, replicate-padded at frame borders and
resized to 224x224 before the forward pass. Exported layers per frame,
shallow to deep: the rectifier outputs feeding the third, fourth and fifth
pooling stages (256, 512 and 512 channels at 56, 28 and 14 pixels).
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .writer import frame_filename, write_mlhf

INPUT_SIDE = 224
WINDOW_FACTOR = 2.8
# indices into torchvision's vgg19().features of the ReLU outputs that feed
# pool3, pool4 and pool5
TAP_INDICES = (17, 26, 35)
EXPECTED_DEPTHS = (256, 512, 512)

_IMAGENET_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
_IMAGENET_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)


class ExportError(RuntimeError):
    pass


def build_network(weights_path=None, random_init: bool = False,
                  seed: int = 0) -> torch.nn.Module:
    """VGG19 feature trunk; weights from a state-dict file, or a seeded
    random initialization when explicitly requested."""
    from torchvision.models import vgg19

    if weights_path is None and not random_init:
        raise ExportError(
            "pretrained weights are required: pass --weights PATH, or "
            "--random-init to run an untrained network")
    torch.manual_seed(seed)
    model = vgg19(weights=None)
    if weights_path is not None:
        path = Path(weights_path)
        if not path.is_file():
            raise ExportError(f"weights file not found: {path}")
        state = torch.load(path, map_location="cpu")
        if isinstance(state, dict) and "state_dict" in state:
            state = state["state_dict"]
        model.load_state_dict(state)
    trunk = model.features.eval()
    for p in trunk.parameters():
        p.requires_grad_(False)
    return trunk


def read_boxes(path) -> list[tuple[float, float, float, float]]:
    """frame,x,y,w,h rows in frame order; extra columns ignored."""
    rows = []
    with open(path, newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or not row[0].strip():
                continue
            if len(row) < 5:
                raise ExportError(
                    f"{path}:{line_no}: expected frame,x,y,w,h")
            try:
                rows.append((int(float(row[0])),
                             tuple(float(v) for v in row[1:5])))
            except ValueError as exc:
                raise ExportError(f"{path}:{line_no}: {exc}") from exc
    rows.sort(key=lambda item: item[0])
    return [box for _, box in rows]


def read_rects(path) -> list[tuple[float, float, float, float]]:
    """groundtruth_rect.txt style x,y,w,h rows."""
    rows = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(),
                                   start=1):
        line = line.strip()
        if not line:
            continue
        parts = re.split(r"[,\t ]+", line)
        if len(parts) < 4:
            raise ExportError(f"{path}:{line_no}: expected x,y,w,h")
        rows.append(tuple(float(v) for v in parts[:4]))
    return rows


def load_boxes_file(path) -> list[tuple[float, float, float, float]]:
    """Accept either a frame-indexed CSV (results.csv) or bare x,y,w,h rows."""
    first = ""
    for line in Path(path).read_text().splitlines():
        if line.strip():
            first = line
            break
    if first.count(",") >= 4:
        return read_boxes(path)
    return read_rects(path)


def frame_paths(seq_dir) -> list[Path]:
    img_dir = Path(seq_dir) / "img"
    if not img_dir.is_dir():
        raise ExportError(f"missing img/ directory under {seq_dir}")
    paths = sorted(p for p in img_dir.iterdir()
                   if p.suffix.lower() in (".jpg", ".jpeg", ".png"))
    if not paths:
        raise ExportError(f"no frames found in {img_dir}")
    return paths


def _even(value: float) -> int:
    return max(2 * int(round(value / 2.0)), 2)


def crop_window(frame: np.ndarray, box) -> np.ndarray:
    """2.8x search window around the box, replicate-padded, as uint8 RGB."""
    x, y, w, h = box
    cx, cy = x + w / 2.0, y + h / 2.0
    win_w, win_h = _even(WINDOW_FACTOR * w), _even(WINDOW_FACTOR * h)
    img_h, img_w = frame.shape[:2]
    xs = np.clip(int(np.floor(cx)) - win_w // 2 + np.arange(win_w),
                 0, img_w - 1)
    ys = np.clip(int(np.floor(cy)) - win_h // 2 + np.arange(win_h),
                 0, img_h - 1)
    return frame[ys[:, None], xs[None, :]]


def window_to_tensor(window: np.ndarray) -> torch.Tensor:
    image = Image.fromarray(window).resize((INPUT_SIDE, INPUT_SIDE),
                                           Image.BILINEAR)
    arr = np.asarray(image, dtype=np.float32) / 255.0
    arr = (arr - _IMAGENET_MEAN) / _IMAGENET_STD
    return torch.from_numpy(arr.transpose(2, 0, 1))[None]


def extract_layers(trunk: torch.nn.Module,
                   tensor: torch.Tensor) -> list[np.ndarray]:
    """The tapped activations as (M, N, D) float32 arrays, shallow first."""
    outputs = []
    with torch.no_grad():
        value = tensor
        for index, module in enumerate(trunk):
            value = module(value)
            if index in TAP_INDICES:
                outputs.append(value[0].permute(1, 2, 0).numpy()
                               .astype(np.float32))
            if index >= max(TAP_INDICES):
                break
    return outputs


def export_sequence(seq_dir, boxes_file, out_dir, weights=None,
                    random_init: bool = False, seed: int = 0,
                    progress=None) -> list[Path]:
    """Write one .mlhf file per frame; returns the written paths."""
    frames = frame_paths(seq_dir)
    boxes = load_boxes_file(boxes_file)
    if len(boxes) != len(frames):
        raise ExportError(
            f"{len(frames)} frames but {len(boxes)} boxes in {boxes_file}")
    trunk = build_network(weights, random_init, seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for index, (frame_path, box) in enumerate(zip(frames, boxes), start=1):
        with Image.open(frame_path) as img:
            frame = np.asarray(img.convert("RGB"))
        window = crop_window(frame, box)
        layers = extract_layers(trunk, window_to_tensor(window))
        depths = tuple(layer.shape[-1] for layer in layers)
        if depths != EXPECTED_DEPTHS:
            raise ExportError(f"unexpected layer depths {depths}")
        if not all(np.all(np.isfinite(layer)) for layer in layers):
            raise ExportError(f"non-finite activations at frame {index}")
        path = out_dir / frame_filename(index)
        write_mlhf(path, layers)
        written.append(path)
        if progress is not None:
            progress(index, len(frames))
    return written
