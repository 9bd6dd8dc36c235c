"""Frequency-domain kernelized ridge regression over multi-layer stacks.

A filter is trained on one feature stack by solving the dual ridge system
over all circular shifts of each layer, diagonalized by the 2-D FFT. Per
layer the model keeps the dual coefficients A~ (M, N) and the base template
X~ (M, N, D), both in the frequency domain. Detection evaluates a kernel
correlation map between the stored template and the new stack, multiplies
by A~ in the frequency domain, and fuses layer responses with their
weights.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError
from .features import FeatureStack

MIN_LAMBDA = 1e-12


@dataclass
class GaussianLabelMap:
    """Soft regression target peaking at the grid center."""

    values: np.ndarray  # (M, N), in (0, 1]
    sigma_eff: float    # bandwidth in feature-map cells


@dataclass
class LayerModel:
    """Learned filter for one feature layer, stored in the frequency domain."""

    alpha_f: np.ndarray     # (M, N) complex dual coefficients
    template_f: np.ndarray  # (M, N, D) complex base template
    layer_id: int = 1


@dataclass
class ResponseMap:
    values: np.ndarray          # (M, N) real fused response
    peak: tuple[int, int]       # (row, col) of the maximum, row-major first
    peak_value: float
    imag_residual: float = 0.0  # max |imag| discarded, for diagnostics


@dataclass
class CorrelationModel:
    layers: list[LayerModel]
    gammas: np.ndarray
    lam: float = 1e-4
    sigma_label: float = 0.1
    eta: float = 0.01
    kernel: str = "linear"
    kernel_sigma: float = 0.5

    def __post_init__(self):
        self.gammas = np.asarray(self.gammas, dtype=np.float64)
        if len(self.gammas) != len(self.layers):
            raise InputError("one fusion weight per layer is required")
        if np.any(self.gammas < 0) or not np.any(self.gammas > 0):
            raise InputError("fusion weights must be >= 0 and not all zero")


def make_label(m: int, n: int, sigma_factor: float) -> GaussianLabelMap:
    """Gaussian label grid: peak 1 at (m//2, n//2), bandwidth
    sigma_factor * sqrt(m * n) cells."""
    if m < 1 or n < 1:
        raise InputError(f"label grid must be >= 1x1, got {m}x{n}")
    sigma = sigma_factor * np.sqrt(m * n)
    ry = np.arange(m) - m // 2
    rx = np.arange(n) - n // 2
    values = np.exp(-(ry[:, None] ** 2 + rx[None, :] ** 2) / (2.0 * sigma * sigma))
    return GaussianLabelMap(values, float(sigma))


def _fft2(a: np.ndarray) -> np.ndarray:
    return np.fft.fft2(a, axes=(0, 1))


def _ifft2(a: np.ndarray) -> np.ndarray:
    return np.fft.ifft2(a, axes=(0, 1))


def _kernel_map_f(xf: np.ndarray, x_energy: float, zf: np.ndarray,
                  z_energy: float, kernel: str, sigma: float) -> np.ndarray:
    """F(k(x, z)) where k is the dense kernel-correlation map; x is the
    conjugated side."""
    cross_f = (np.conj(xf) * zf).sum(axis=-1)
    if kernel == "linear":
        return cross_f
    if kernel == "gaussian":
        cross = _ifft2(cross_f).real
        d2 = np.maximum(x_energy + z_energy - 2.0 * cross, 0.0)
        return _fft2(np.exp(-d2 / (sigma * sigma)))
    raise InputError(f"unknown kernel {kernel!r}")


def kernel_correlation(x: np.ndarray, z: np.ndarray, kernel: str = "linear",
                       sigma: float = 0.5) -> np.ndarray:
    """Dense kernel map over all circular shifts; entry (a, b) is the kernel
    between x and z advanced by (a, b) cells. x and z must share (M, N, D)."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise InputError(f"shape mismatch: {x.shape} vs {z.shape}")
    cross = _ifft2((np.conj(_fft2(x)) * _fft2(z)).sum(axis=-1)).real
    if kernel == "linear":
        return cross
    if kernel == "gaussian":
        d2 = np.maximum(float((x * x).sum()) + float((z * z).sum())
                        - 2.0 * cross, 0.0)
        return np.exp(-d2 / (sigma * sigma))
    raise InputError(f"unknown kernel {kernel!r}")


def _template_energy(template_f: np.ndarray) -> float:
    m, n = template_f.shape[:2]
    return float((np.abs(template_f) ** 2).sum() / (m * n))


def train_layer(x: np.ndarray, label: GaussianLabelMap, lam: float,
                kernel: str = "linear", kernel_sigma: float = 0.5,
                layer_id: int = 1) -> LayerModel:
    """Solve the dual ridge system for one layer in the frequency domain:
    A = F(y) / (F(k_xx) + lambda)."""
    x = np.asarray(x, dtype=np.float64)
    if label.values.shape != x.shape[:2]:
        raise InputError(
            f"label {label.values.shape} does not match layer {x.shape[:2]}")
    if lam < MIN_LAMBDA:
        warnings.warn(
            f"regularizer {lam} below {MIN_LAMBDA}; clamping to avoid a "
            "degenerate frequency-domain division", RuntimeWarning)
        lam = MIN_LAMBDA
    xf = _fft2(x)
    energy = float((x * x).sum())
    kf = _kernel_map_f(xf, energy, xf, energy, kernel, kernel_sigma)
    alpha_f = _fft2(label.values) / (kf + lam)
    return LayerModel(alpha_f, xf, layer_id)


def train_model(stack: FeatureStack, label: GaussianLabelMap, lam: float,
                sigma_label: float, eta: float, kernel: str = "linear",
                kernel_sigma: float = 0.5) -> CorrelationModel:
    """Train per-layer filters on a full stack, taking fusion weights from
    the layers."""
    layers = [train_layer(layer.data, label, lam, kernel, kernel_sigma,
                          layer.layer_id)
              for layer in stack.layers]
    gammas = np.array([layer.weight for layer in stack.layers])
    return CorrelationModel(layers, gammas, lam, sigma_label, eta,
                            kernel, kernel_sigma)


def _check_alignment(model: CorrelationModel, stack: FeatureStack) -> None:
    if len(model.layers) != len(stack.layers):
        raise InputError(
            f"model has {len(model.layers)} layers, stack has {len(stack.layers)}")
    for lm, layer in zip(model.layers, stack.layers):
        if lm.template_f.shape != layer.data.shape:
            raise InputError(
                f"layer {lm.layer_id}: model {lm.template_f.shape} vs "
                f"stack {layer.data.shape}")


def detect(model: CorrelationModel, stack: FeatureStack) -> ResponseMap:
    """Fused response map; its argmax (row-major first occurrence) is the
    translation peak. The template side of the kernel is conjugated so the
    peak moves with the target."""
    _check_alignment(model, stack)
    m, n = stack.spatial_size
    fused = np.zeros((m, n))
    residual = 0.0
    for lm, layer, gamma in zip(model.layers, stack.layers, model.gammas):
        z = layer.data
        zf = _fft2(z)
        kf = _kernel_map_f(lm.template_f, _template_energy(lm.template_f),
                           zf, float((z * z).sum()),
                           model.kernel, model.kernel_sigma)
        response = _ifft2(lm.alpha_f * kf)
        fused += gamma * response.real
        residual = max(residual, float(np.abs(response.imag).max()))
    peak = np.unravel_index(int(np.argmax(fused)), fused.shape)
    return ResponseMap(fused, (int(peak[0]), int(peak[1])),
                       float(fused[peak]), residual)


def estimate_translation(response: ResponseMap, cell_size: int,
                         window_center: tuple[float, float],
                         scale: float = 1.0) -> tuple[float, float]:
    """Convert the response peak to a frame position: signed cell offset from
    the map center, scaled to pixels, added to the previous center."""
    m, n = response.values.shape
    dy = response.peak[0] - m // 2
    dx = response.peak[1] - n // 2
    return (window_center[0] + dx * cell_size * scale,
            window_center[1] + dy * cell_size * scale)


def update_model(model: CorrelationModel, stack: FeatureStack,
                 label: GaussianLabelMap) -> CorrelationModel:
    """Linear interpolation toward a freshly trained model:
    X~_k = (1-eta) X~_{k-1} + eta X_k, same for A~."""
    _check_alignment(model, stack)
    eta = model.eta
    fresh = [train_layer(layer.data, label, model.lam, model.kernel,
                         model.kernel_sigma, lm.layer_id)
             for lm, layer in zip(model.layers, stack.layers)]
    blended = [LayerModel((1.0 - eta) * old.alpha_f + eta * new.alpha_f,
                          (1.0 - eta) * old.template_f + eta * new.template_f,
                          old.layer_id)
               for old, new in zip(model.layers, fresh)]
    return replace(model, layers=blended)
