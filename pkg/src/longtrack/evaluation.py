"""One-pass-evaluation metrics: distance precision and overlap success.

Predictions and ground truth are parallel per-frame (x, y, w, h) rows.
Ground-truth rows that are all zero mark the target as absent; those frames
are excluded from both metrics and counted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxes import Box, center_distance, iou
from .errors import InputError

PRECISION_THRESHOLDS = np.arange(0, 51, 1.0)       # pixels
SUCCESS_THRESHOLDS = np.arange(0, 21, 1.0) * 0.05  # overlap ratios
PRECISION_SCORE_AT = 20.0


@dataclass
class EvaluationResult:
    precision_thresholds: np.ndarray
    precision: np.ndarray
    precision_at_20: float
    success_thresholds: np.ndarray
    success: np.ndarray
    auc: float
    n_frames: int
    n_excluded: int


def center_error(pred: Box, gt: Box) -> float:
    """Euclidean distance between box centers, in pixels."""
    return center_distance(pred, gt)


def _paired_boxes(preds, gts):
    if len(preds) != len(gts):
        raise InputError(f"{len(preds)} predictions vs {len(gts)} ground truths")
    pairs = []
    excluded = 0
    for pred, gt in zip(preds, gts):
        gt = np.asarray(gt, dtype=np.float64)
        if np.all(gt == 0):
            excluded += 1
            continue
        pred = np.asarray(pred, dtype=np.float64)
        pairs.append((Box(*pred[:4]), Box(*gt[:4])))
    return pairs, excluded


def precision_curve(preds, gts) -> tuple[np.ndarray, float, int]:
    """Fraction of frames with center error <= t for t in 0..50 px, plus the
    score at 20 px and the absent-frame exclusion count."""
    pairs, excluded = _paired_boxes(preds, gts)
    errors = np.array([center_error(p, g) for p, g in pairs])
    if errors.size:
        curve = np.array([(errors <= t).mean() for t in PRECISION_THRESHOLDS])
    else:
        curve = np.zeros_like(PRECISION_THRESHOLDS)
    score = float(curve[PRECISION_THRESHOLDS == PRECISION_SCORE_AT][0])
    return curve, score, excluded


def success_curve(preds, gts) -> tuple[np.ndarray, float, int]:
    """Fraction of frames with IOU > t for the 21 thresholds 0, 0.05, ..., 1,
    plus the AUC (mean of the curve) and the exclusion count."""
    pairs, excluded = _paired_boxes(preds, gts)
    overlaps = np.array([iou(p, g) for p, g in pairs])
    if overlaps.size:
        curve = np.array([(overlaps > t).mean() for t in SUCCESS_THRESHOLDS])
    else:
        curve = np.zeros_like(SUCCESS_THRESHOLDS)
    return curve, float(curve.mean()), excluded


def evaluate(preds, gts) -> EvaluationResult:
    p_curve, p20, excluded = precision_curve(preds, gts)
    s_curve, auc, _ = success_curve(preds, gts)
    return EvaluationResult(PRECISION_THRESHOLDS.copy(), p_curve, p20,
                            SUCCESS_THRESHOLDS.copy(), s_curve, auc,
                            len(preds), excluded)


def write_curve_csv(path, thresholds, values) -> None:
    """Headerless threshold,value rows."""
    with open(path, "w") as fh:
        for t, v in zip(thresholds, values):
            fh.write(f"{t:g},{v:.6f}\n")


def write_summary_csv(path, result: EvaluationResult) -> None:
    with open(path, "w") as fh:
        fh.write(f"precision_at_20,{result.precision_at_20:.6f}\n")
        fh.write(f"auc,{result.auc:.6f}\n")
