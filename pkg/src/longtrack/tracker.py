"""Per-frame tracking pipeline.

Each step runs, in order: translation estimation with the multi-layer
correlation filter, a GM-PHD bookkeeping cycle fed with the estimate as
its sole measurement, conditional re-detection (SVM proposals filtered by
the GM-PHD filter, position refined only when the re-detected response
clears the activation threshold), scale estimation, model updates, and
detector training on confident frames.

One evidence predicate gates everything that would otherwise act on a
target-free frame: when the response peak is below the re-detection
threshold and no refinement succeeded, the box holds its position, the
scale change is not applied, and the filters are not blended (a peak that
low means the map carries no localization signal, and occluder windows
have low feature energy, which would inflate the interpolated dual
coefficients). With re-detection disabled the predicate is always true and
the pipeline reduces to a plain correlation tracker.

The translation filter operates at a fixed feature size: the search window
is cropped at base_window * scale and resized back to base_window pixels,
so cell offsets map to scale * cell_size frame pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import colornames, correlation, gmphd, mlhf, redetect, scale as scale_mod
from .boxes import Box, clip_into_frame, from_center
from .correlation import CorrelationModel, GaussianLabelMap
from .errors import InputError, TrackingError
from .features import FeatureStack, bilinear_resize, build_feature_stack, crop_patch
from .gmphd import ClutterModel, GaussianComponent, MotionModel
from .incsvm import IncrementalSVM
from .scale import ScaleModel


@dataclass
class TrackerConfig:
    # correlation filter
    lam: float = 1e-4
    sigma_label: float = 0.1
    eta: float = 0.01
    kernel: str = "linear"
    kernel_sigma: float = 0.5
    cell_size: int = 4
    window_factor: float = 2.8
    deep_gammas: tuple = (0.02, 0.4, 1.0)
    handcrafted_gamma: float = 0.1
    # thresholds
    t_redetect: float = 0.15
    t_train: float = 0.40
    # detector
    svm_c: float = 2.0
    svm_sigma: float = 0.5
    delta_pos: float = 0.9
    delta_neg: float = 0.3
    n_proposals: int = 5
    nms_iou: float = 0.5
    max_support_vectors: int = 200
    # scale
    n_scales: int = 31
    scale_step: float = 1.04
    scale_damping: float = 0.6
    # GM-PHD
    clutter_rate: float = 4.0
    prune_threshold: float = 1e-5
    merge_distance: float = 4.0
    max_components: int = 100
    p_survival: float = 0.99
    p_detect: float = 0.9
    birth_weight: float = 0.1
    birth_cov: float = 25.0
    q_pos: float = 4.0
    q_vel: float = 1.0
    r_pos: float = 9.0
    # pipeline
    enable_redetection: bool = True
    enable_scale: bool = True
    seed: int = 42

    def __post_init__(self):
        if not self.t_redetect < self.t_train:
            raise InputError(
                f"need t_redetect < t_train, got {self.t_redetect} >= {self.t_train}")
        if not self.delta_neg < self.delta_pos:
            raise InputError(
                f"need delta_neg < delta_pos, got {self.delta_neg} >= {self.delta_pos}")


@dataclass
class Diagnostics:
    frame_index: int
    response: float
    redetected: bool
    redetect_response: float
    scale: float           # per-frame scale factor chosen by the estimator
    n_components: int
    box: Box


@dataclass
class TrackerState:
    box: Box
    base_size: tuple[float, float]     # target size at init
    window_size: tuple[int, int]       # fixed search-window pixels (w, h)
    scale_factor: float
    correlation: CorrelationModel
    label: GaussianLabelMap
    scale: ScaleModel | None
    svm: IncrementalSVM
    phd: list[GaussianComponent]
    motion: MotionModel
    clutter: ClutterModel
    config: TrackerConfig
    table: np.ndarray
    rng: np.random.Generator
    frame_shape: tuple[int, int]       # (h, w)
    last_response: float = math.nan
    frame_index: int = 1


def _even(value: float) -> int:
    return max(2 * int(round(value / 2.0)), 2)


def search_window_size(target_size, factor: float) -> tuple[int, int]:
    """Search window, about ``factor`` times the target, rounded to even."""
    return (_even(factor * target_size[0]), _even(factor * target_size[1]))


def _window_patch(frame: np.ndarray, center, window: tuple[int, int],
                  scale_factor: float) -> np.ndarray:
    w = max(int(round(window[0] * scale_factor)), 8)
    h = max(int(round(window[1] * scale_factor)), 8)
    patch = crop_patch(frame, center, (w, h)).pixels
    if (h, w) != (window[1], window[0]):
        patch = bilinear_resize(patch.astype(np.float64),
                                (window[1], window[0]))
    return patch


def assemble_window_stack(frame: np.ndarray, center, window: tuple[int, int],
                          scale_factor: float, table: np.ndarray,
                          config: TrackerConfig,
                          deep_path=None) -> FeatureStack:
    patch = _window_patch(frame, center, window, scale_factor)
    return build_feature_stack(patch, table, config.cell_size, deep_path,
                               config.deep_gammas, config.handcrafted_gamma)


def _clipped_box(center, size, frame_shape) -> Box:
    h, w = frame_shape
    return clip_into_frame(from_center(center[0], center[1],
                                       size[0], size[1]), w, h)


def _phd_cycle(state: TrackerState, measurements) -> None:
    births = gmphd.birth_components(
        measurements, np.diag([state.config.birth_cov] * 4),
        state.config.birth_weight)
    predicted = gmphd.predict(state.phd, state.motion, births)
    posterior = gmphd.update(predicted, measurements, state.motion,
                             state.clutter)
    state.phd = gmphd.prune_and_merge(posterior, state.config.prune_threshold,
                                      state.config.merge_distance,
                                      state.config.max_components)


def initialize(frame: np.ndarray, init_box: Box, config: TrackerConfig,
               table: np.ndarray | None = None,
               deep_path=None) -> TrackerState:
    """Train translation, scale and detector models on the first frame and
    seed the GM-PHD mixture at the box center; no detection happens here."""
    frame_h, frame_w = frame.shape[:2]
    if (init_box.x < 0 or init_box.y < 0
            or init_box.x + init_box.w > frame_w
            or init_box.y + init_box.h > frame_h):
        raise InputError(f"init box {init_box} outside {frame_w}x{frame_h} frame")
    if table is None:
        table = colornames.load_table()
    rng = np.random.default_rng(config.seed)
    center = init_box.center
    base_size = (float(init_box.w), float(init_box.h))
    window = search_window_size(base_size, config.window_factor)

    stack = assemble_window_stack(frame, center, window, 1.0, table, config,
                                  deep_path)
    m, n = stack.spatial_size
    label = correlation.make_label(m, n, config.sigma_label)
    corr = correlation.train_model(stack, label, config.lam,
                                   config.sigma_label, config.eta,
                                   config.kernel, config.kernel_sigma)

    scale_model = None
    if config.enable_scale:
        scale_model = scale_mod.train_scale_model(
            frame, center, base_size, config.n_scales, config.scale_step,
            config.lam, config.sigma_label, config.eta, config.kernel,
            config.kernel_sigma)

    svm = IncrementalSVM(config.svm_c, config.svm_sigma)
    if config.enable_redetection:
        redetect.train_detector(svm, frame, init_box, rng, config.delta_pos,
                                config.delta_neg, config.max_support_vectors)

    phd = gmphd.birth_components([center], np.diag([config.birth_cov] * 4),
                                 config.birth_weight)
    motion = gmphd.default_motion_model(config.p_survival, config.p_detect,
                                        config.q_pos, config.q_vel,
                                        config.r_pos)
    clutter = ClutterModel(config.clutter_rate, float(frame_w * frame_h))
    return TrackerState(init_box, base_size, window, 1.0, corr, label,
                        scale_model, svm, phd, motion, clutter, config, table,
                        rng, (frame_h, frame_w))


def step(state: TrackerState, frame: np.ndarray,
         deep_path=None) -> tuple[TrackerState, Box, Diagnostics]:
    """Advance the tracker by one frame. Returns the (mutated) state, the
    new clipped box and per-frame diagnostics."""
    if frame.shape[:2] != state.frame_shape:
        raise InputError(
            f"frame size {frame.shape[:2]} != tracker's {state.frame_shape}")
    cfg = state.config
    s = state.scale_factor
    size = (state.base_size[0] * s, state.base_size[1] * s)

    # translation estimation
    stack = assemble_window_stack(frame, state.box.center, state.window_size,
                                  s, state.table, cfg, deep_path)
    response = correlation.detect(state.correlation, stack)
    pos = correlation.estimate_translation(response, cfg.cell_size,
                                           state.box.center, s)
    peak = response.peak_value
    # a sub-threshold response map carries no localization evidence: hold the
    # last position and let re-detection search instead of drifting on noise
    if cfg.enable_redetection and peak < cfg.t_redetect:
        pos = state.box.center
    box = _clipped_box(pos, size, state.frame_shape)
    pos = box.center

    # GM-PHD bookkeeping with the estimate as the sole measurement
    if cfg.enable_redetection:
        _phd_cycle(state, [pos])

    # conditional re-detection
    redetected = False
    redetect_response = math.nan
    refined = False
    if cfg.enable_redetection and peak < cfg.t_redetect and state.svm.n_samples:
        redetected = True
        proposals = redetect.propose(state.svm, frame, pos, size,
                                     cfg.n_proposals, cfg.nms_iou)
        centers = [p.center for p, _ in proposals]
        if centers:
            _phd_cycle(state, centers)
            (rx, ry), _weight = gmphd.max_weight_estimate(state.phd)
            rbox = _clipped_box((rx, ry), size, state.frame_shape)
            rstack = assemble_window_stack(frame, rbox.center,
                                           state.window_size, s, state.table,
                                           cfg, deep_path)
            redetect_response = correlation.detect(state.correlation,
                                                   rstack).peak_value
            if redetect_response > cfg.t_redetect:
                box = rbox
                pos = box.center
                refined = True

    # scale estimation at the final position; applied only when the frame
    # actually shows the target (otherwise the pyramid scores pure noise and
    # the size would random-walk during occlusions)
    s_hat = 1.0
    has_evidence = (not cfg.enable_redetection or peak >= cfg.t_redetect
                    or refined)
    if cfg.enable_scale and state.scale is not None and has_evidence:
        pyramid = scale_mod.build_pyramid(frame, pos, size, cfg.n_scales,
                                          cfg.scale_step,
                                          state.scale.feature_size)
        try:
            s_hat, _ = scale_mod.estimate_scale(state.scale, pyramid)
        except TrackingError:
            s_hat = 1.0
        size = scale_mod.damped_size(size, s_hat, cfg.scale_damping)
        s = size[0] / state.base_size[0]
        box = _clipped_box(pos, size, state.frame_shape)
        pos = box.center

    # model updates at the final position, gated on the same evidence: blending
    # in occluded frames poisons the filters (their feature energy is lower,
    # which inflates the interpolated dual coefficients)
    if has_evidence:
        update_stack = assemble_window_stack(frame, pos, state.window_size, s,
                                             state.table, cfg, deep_path)
        state.correlation = correlation.update_model(state.correlation,
                                                     update_stack, state.label)
        if cfg.enable_scale and state.scale is not None:
            state.scale = scale_mod.update_scale_model(state.scale, frame,
                                                       pos, size)

    # detector training on confident frames
    if cfg.enable_redetection and peak >= cfg.t_train:
        redetect.train_detector(state.svm, frame, box, state.rng,
                                cfg.delta_pos, cfg.delta_neg,
                                cfg.max_support_vectors)

    state.box = box
    state.scale_factor = s
    state.last_response = peak
    state.frame_index += 1
    diag = Diagnostics(state.frame_index, peak, redetected,
                       redetect_response, s_hat,
                       len(state.phd), box)
    return state, box, diag


def run_sequence(frames, init_box: Box, config: TrackerConfig,
                 table: np.ndarray | None = None, deep_dir=None
                 ) -> tuple[list[Box], list[Diagnostics]]:
    """Initialize on the first frame, step through the rest; one output box
    and diagnostics record per frame. Errors carry the 1-based frame index."""
    boxes: list[Box] = []
    diags: list[Diagnostics] = []
    state = None
    for i, frame in enumerate(frames, start=1):
        deep_path = None
        if deep_dir is not None:
            deep_path = Path(deep_dir) / mlhf.frame_filename(i)
            if not deep_path.is_file():
                raise InputError(f"frame {i}: missing deep-feature file {deep_path}")
        try:
            if state is None:
                state = initialize(frame, init_box, config, table, deep_path)
                boxes.append(init_box)
                diags.append(Diagnostics(1, math.nan, False, math.nan, 1.0,
                                         len(state.phd), init_box))
            else:
                state, box, diag = step(state, frame, deep_path)
                boxes.append(box)
                diags.append(diag)
        except TrackingError as exc:
            raise type(exc)(f"frame {i}: {exc}") from exc
    if state is None:
        raise InputError("empty sequence")
    return boxes, diags


def config_from_mapping(values: dict) -> TrackerConfig:
    """Build a config from string key/value pairs (file or CLI overrides),
    coercing each value to the field's type."""
    kwargs = {}
    by_name = {f.name: f for f in fields(TrackerConfig)}
    for key, raw in values.items():
        if key not in by_name:
            raise InputError(f"unknown config key {key!r}")
        default = by_name[key].default
        if isinstance(default, bool):
            kwargs[key] = str(raw).strip().lower() in ("1", "true", "yes", "on")
        elif isinstance(default, int):
            kwargs[key] = int(raw)
        elif isinstance(default, float):
            kwargs[key] = float(raw)
        elif isinstance(default, tuple):
            kwargs[key] = tuple(float(v) for v in str(raw).split(","))
        else:
            kwargs[key] = str(raw)
    return TrackerConfig(**kwargs)
