"""Scale estimation with a dedicated HOG correlation filter.

A pyramid of S patches at scales a^n around the estimated position is
cropped at the live target size, resized to the model's canonical feature
size, and scored level by level with a translation-style filter; the level
whose response peaks highest gives the scale factor. The filter itself is
trained and interpolated exactly like the translation filter.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import correlation, features
from .correlation import CorrelationModel, GaussianLabelMap
from .errors import DegenerateInputError, NoEstimateError
from .features import FeatureLayer, FeatureStack

MIN_PATCH_SIDE = 8
SIZE_DAMPING = 0.6  # new size = old * (damping * s_hat + (1 - damping))


@dataclass
class ScaleModel:
    filter: CorrelationModel          # single-layer HOG filter
    label: GaussianLabelMap
    n_scales: int                     # S, odd
    step: float                       # a > 1
    current_size: tuple[float, float]  # live target size (w, h) in pixels
    feature_size: tuple[int, int]     # canonical patch size (w, h) for features

    def __post_init__(self):
        if self.n_scales % 2 != 1:
            raise DegenerateInputError(f"S must be odd, got {self.n_scales}")
        if self.step <= 1.0:
            raise DegenerateInputError(f"scale step must exceed 1, got {self.step}")


def scale_exponents(n_scales: int) -> np.ndarray:
    half = (n_scales - 1) // 2
    return np.arange(-half, half + 1)


def build_pyramid(frame: np.ndarray, center: tuple[float, float],
                  size: tuple[float, float], n_scales: int, step: float,
                  out_size: tuple[int, int] | None = None
                  ) -> list[tuple[int, np.ndarray | None]]:
    """Patches at scales step**n for n in {-(S-1)/2, ..., (S-1)/2}, each
    resized to ``out_size`` (or ``size``). Levels whose scaled crop would
    fall below 8 px on a side are skipped and returned as None."""
    if n_scales % 2 != 1:
        raise DegenerateInputError(f"S must be odd, got {n_scales}")
    out_w, out_h = (int(round(size[0])), int(round(size[1]))) \
        if out_size is None else (int(out_size[0]), int(out_size[1]))
    levels: list[tuple[int, np.ndarray | None]] = []
    for n in scale_exponents(n_scales):
        s = step ** int(n)
        w, h = int(round(size[0] * s)), int(round(size[1] * s))
        if w < MIN_PATCH_SIDE or h < MIN_PATCH_SIDE:
            levels.append((int(n), None))
            continue
        patch = features.crop_patch(frame, center, (w, h)).pixels
        levels.append((int(n), features.bilinear_resize(
            patch.astype(np.float64), (out_h, out_w))))
    return levels


def _scale_stack(patch: np.ndarray, window: np.ndarray) -> FeatureStack:
    hog = features.extract_hog(patch, features.CELL_SIZE)
    data = features.apply_cosine_window(features.standardize_layer(hog), window)
    return FeatureStack([FeatureLayer(data, layer_id=1, weight=1.0)])


def _feature_window(feature_size: tuple[int, int]) -> np.ndarray:
    m = int(feature_size[1]) // features.CELL_SIZE
    n = int(feature_size[0]) // features.CELL_SIZE
    return features.cosine_window(m, n)


def train_scale_model(frame: np.ndarray, center: tuple[float, float],
                      size: tuple[float, float], n_scales: int, step: float,
                      lam: float, sigma_label: float, eta: float,
                      kernel: str = "linear", kernel_sigma: float = 0.5
                      ) -> ScaleModel:
    """Fresh scale filter on the unscaled patch at ``size``; that size also
    becomes the canonical feature size for the model's lifetime."""
    feat_w = max(int(round(size[0])), MIN_PATCH_SIDE)
    feat_h = max(int(round(size[1])), MIN_PATCH_SIDE)
    patch = features.crop_patch(frame, center, (feat_w, feat_h)).pixels
    window = _feature_window((feat_w, feat_h))
    stack = _scale_stack(patch.astype(np.float64), window)
    m, n = stack.spatial_size
    label = correlation.make_label(m, n, sigma_label)
    model = correlation.train_model(stack, label, lam, sigma_label, eta,
                                    kernel, kernel_sigma)
    return ScaleModel(model, label, n_scales, step,
                      (float(size[0]), float(size[1])), (feat_w, feat_h))


def estimate_scale(model: ScaleModel, pyramid) -> tuple[float, np.ndarray]:
    """Best scale factor a^n* and the per-level peak responses (nan for
    skipped levels). Ties prefer the level closest to n = 0, then lower n."""
    window = _feature_window(model.feature_size)
    exponents = []
    responses = np.full(len(pyramid), np.nan)
    for idx, (n, patch) in enumerate(pyramid):
        exponents.append(n)
        if patch is None:
            continue
        response = correlation.detect(model.filter, _scale_stack(patch, window))
        responses[idx] = response.peak_value
    if np.all(np.isnan(responses)):
        raise NoEstimateError("every pyramid level was skipped")
    best = np.nanmax(responses)
    candidates = [exponents[i] for i in range(len(pyramid))
                  if responses[i] == best]
    n_star = min(candidates, key=lambda n: (abs(n), n))
    return float(model.step ** n_star), responses


def update_scale_model(model: ScaleModel, frame: np.ndarray,
                       center: tuple[float, float],
                       new_size: tuple[float, float]) -> ScaleModel:
    """Train a fresh filter on the patch at ``new_size`` (resized to the
    canonical feature size) and interpolate with the learning rate; the
    live size always updates."""
    feat_w, feat_h = model.feature_size
    w = max(int(round(new_size[0])), MIN_PATCH_SIDE)
    h = max(int(round(new_size[1])), MIN_PATCH_SIDE)
    patch = features.crop_patch(frame, center, (w, h)).pixels
    patch = features.bilinear_resize(patch.astype(np.float64), (feat_h, feat_w))
    stack = _scale_stack(patch, _feature_window(model.feature_size))
    updated = correlation.update_model(model.filter, stack, model.label)
    return replace(model, filter=updated,
                   current_size=(float(new_size[0]), float(new_size[1])))


def damped_size(size: tuple[float, float], s_hat: float,
                damping: float = SIZE_DAMPING) -> tuple[float, float]:
    factor = damping * s_hat + (1.0 - damping)
    return (size[0] * factor, size[1] * factor)
