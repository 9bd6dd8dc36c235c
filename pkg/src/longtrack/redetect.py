"""Re-detection: sample labeling, detector training sets and the proposal scan.

The detector is the incremental SVM from :mod:`longtrack.incsvm`, fed with
2240-dim HOG/LUV/gradient-magnitude vectors of candidate boxes resized to
the canonical 32 x 32 window. On confident frames the tracker trains it
with jittered positives and randomly sampled negatives; when activated it
slides the current target window over a search region six times the target
size and returns the top-scoring boxes after non-maximum suppression.
"""

from __future__ import annotations

import numpy as np

from .boxes import Box, from_center, iou
from .errors import DegenerateInputError, NoModelError
from .features import DETECTOR_WINDOW, bilinear_resize, extract_detector_features
from .incsvm import IncrementalSVM

POSITIVE_JITTER = 2       # +-pixels for positive candidate shifts
NEGATIVE_RATIO = 3        # negatives per positive candidate
TRAIN_AREA_FACTOR = 4.0   # negative sampling region, times target size
SCAN_AREA_FACTOR = 6.0    # proposal search region, times target size
NMS_IOU = 0.5
MAX_SUPPORT_VECTORS = 200
_SCAN_CHUNK = 256


def label_samples(candidates, target: Box, delta_pos: float = 0.9,
                  delta_neg: float = 0.3) -> list[tuple[Box, int]]:
    """IOU-threshold labeling: >= delta_pos -> +1, < delta_neg -> -1, the
    band in between is excluded from the output."""
    if not delta_neg < delta_pos:
        raise DegenerateInputError(
            f"need delta_neg < delta_pos, got {delta_neg} >= {delta_pos}")
    labeled = []
    for box in candidates:
        overlap = iou(box, target)
        if overlap >= delta_pos:
            labeled.append((box, 1))
        elif overlap < delta_neg:
            labeled.append((box, -1))
    return labeled


def generate_training_boxes(target: Box, frame_size: tuple[int, int],
                            rng: np.random.Generator,
                            delta_neg: float = 0.3) -> list[Box]:
    """Positive candidates (the target plus its 8 jittered copies) followed
    by 3x as many negatives sampled uniformly in the 4x region, all with
    IOU < delta_neg and clipped to the frame."""
    frame_w, frame_h = frame_size
    if target.w > frame_w or target.h > frame_h:
        raise DegenerateInputError(
            f"target {target.w}x{target.h} larger than frame {frame_w}x{frame_h}")

    def clipped(x, y):
        x = min(max(x, 0.0), frame_w - target.w)
        y = min(max(y, 0.0), frame_h - target.h)
        return Box(x, y, target.w, target.h)

    positives = [clipped(target.x, target.y)]
    for dy in (-POSITIVE_JITTER, 0, POSITIVE_JITTER):
        for dx in (-POSITIVE_JITTER, 0, POSITIVE_JITTER):
            if dx == 0 and dy == 0:
                continue
            positives.append(clipped(target.x + dx, target.y + dy))

    cx, cy = target.center
    half_w = TRAIN_AREA_FACTOR * target.w / 2.0
    half_h = TRAIN_AREA_FACTOR * target.h / 2.0
    lo_x, hi_x = max(0.0, cx - half_w), min(float(frame_w), cx + half_w)
    lo_y, hi_y = max(0.0, cy - half_h), min(float(frame_h), cy + half_h)

    wanted = NEGATIVE_RATIO * len(positives)
    negatives: list[Box] = []
    attempts = 0
    while len(negatives) < wanted and attempts < 200 * wanted:
        attempts += 1
        nx = rng.uniform(lo_x, hi_x) - target.w / 2.0
        ny = rng.uniform(lo_y, hi_y) - target.h / 2.0
        cand = clipped(nx, ny)
        if iou(cand, target) < delta_neg:
            negatives.append(cand)
    return positives + negatives


def _gather_windows(frame: np.ndarray, boxes) -> np.ndarray:
    """Crop every box (replicating at frame borders) and resize the batch to
    the canonical detector window."""
    img_h, img_w = frame.shape[:2]
    crops = []
    for box in boxes:
        w, h = max(int(round(box.w)), 1), max(int(round(box.h)), 1)
        x0, y0 = int(round(box.x)), int(round(box.y))
        xs = np.clip(x0 + np.arange(w), 0, img_w - 1)
        ys = np.clip(y0 + np.arange(h), 0, img_h - 1)
        crops.append(frame[ys[:, None], xs[None, :]])
    sizes = {c.shape for c in crops}
    if len(sizes) == 1:
        batch = np.asarray(crops, dtype=np.float64)
        return bilinear_resize(batch, (DETECTOR_WINDOW, DETECTOR_WINDOW))
    resized = [bilinear_resize(c.astype(np.float64),
                               (DETECTOR_WINDOW, DETECTOR_WINDOW))
               for c in crops]
    return np.asarray(resized)


def features_for_boxes(frame: np.ndarray, boxes) -> np.ndarray:
    """Detector feature vectors for a list of boxes, shape (len(boxes), 2240)."""
    out = []
    for start in range(0, len(boxes), _SCAN_CHUNK):
        windows = _gather_windows(frame, boxes[start:start + _SCAN_CHUNK])
        out.append(extract_detector_features(windows))
    return np.concatenate(out, axis=0)


def train_detector(svm: IncrementalSVM, frame: np.ndarray, target: Box,
                   rng: np.random.Generator, delta_pos: float = 0.9,
                   delta_neg: float = 0.3,
                   max_sv: int = MAX_SUPPORT_VECTORS) -> IncrementalSVM:
    """One confident-frame training round: sample, label, extract features,
    absorb every sample, then trim to the support-vector budget."""
    frame_h, frame_w = frame.shape[:2]
    candidates = generate_training_boxes(target, (frame_w, frame_h), rng,
                                         delta_neg)
    labeled = label_samples(candidates, target, delta_pos, delta_neg)
    if not labeled:
        return svm
    feats = features_for_boxes(frame, [box for box, _ in labeled])
    for vec, (_, label) in zip(feats, labeled):
        svm.add_sample(vec, label)
    svm.enforce_budget(max_sv)
    return svm


def _nms(boxes, scores, threshold: float, limit: int | None = None) -> list[int]:
    order = sorted(range(len(boxes)), key=lambda i: (-scores[i], i))
    keep: list[int] = []
    for i in order:
        if all(iou(boxes[i], boxes[j]) <= threshold for j in keep):
            keep.append(i)
            if limit is not None and len(keep) >= limit:
                break
    return keep


def propose(svm: IncrementalSVM, frame: np.ndarray, center: tuple[float, float],
            target_size: tuple[float, float], k: int = 5,
            nms_iou: float = NMS_IOU) -> list[tuple[Box, float]]:
    """Top-k scoring sliding windows in the 6x search region around
    ``center``, non-maximum suppressed, sorted by descending score."""
    if svm.n_samples == 0:
        raise NoModelError("detector has not been trained")
    img_h, img_w = frame.shape[:2]
    w, h = float(target_size[0]), float(target_size[1])
    stride = max(2, int(round(w / 10.0)))
    lo_x = max(0.0, center[0] - SCAN_AREA_FACTOR * w / 2.0)
    hi_x = min(float(img_w), center[0] + SCAN_AREA_FACTOR * w / 2.0)
    lo_y = max(0.0, center[1] - SCAN_AREA_FACTOR * h / 2.0)
    hi_y = min(float(img_h), center[1] + SCAN_AREA_FACTOR * h / 2.0)

    xs = np.arange(lo_x, max(hi_x - w, lo_x) + 1e-9, stride)
    ys = np.arange(lo_y, max(hi_y - h, lo_y) + 1e-9, stride)
    boxes = [Box(min(x, img_w - w), min(y, img_h - h), w, h)
             for y in ys for x in xs]
    if not boxes:
        boxes = [from_center(center[0], center[1], w, h)]
    feats = features_for_boxes(frame, boxes)
    scores = svm.decision_values(feats)
    keep = _nms(boxes, scores, nms_iou, limit=k)
    return [(boxes[i], float(scores[i])) for i in keep]
