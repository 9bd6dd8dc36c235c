"""Gaussian-mixture PHD filter over 2-D positions with constant-velocity
dynamics.

The mixture intensity is a list of weighted Gaussians over the state
(x, y, vx, vy). Birth components are seeded at current measurements with
zero initial velocity; the update handles missed detections, uniform
clutter and the per-measurement Kalman corrections; pruning and merging
keep the mixture compact. All operations return new component lists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoEstimateError, NumericalError

DEFAULT_BIRTH_WEIGHT = 0.1
DEFAULT_BIRTH_COV = (25.0, 25.0, 25.0, 25.0)


@dataclass
class GaussianComponent:
    weight: float
    mean: np.ndarray  # (4,) = (x, y, vx, vy)
    cov: np.ndarray   # (4, 4) symmetric positive-definite


@dataclass
class MotionModel:
    F: np.ndarray       # (4, 4) state transition
    Q: np.ndarray       # (4, 4) process noise
    H: np.ndarray       # (2, 4) measurement matrix
    R: np.ndarray       # (2, 2) measurement noise
    p_survival: float = 0.99
    p_detect: float = 0.9


@dataclass
class ClutterModel:
    rate: float   # mean clutter count per frame (lambda_t)
    area: float   # surveillance region size in pixels^2

    @property
    def density(self) -> float:
        """Uniform clutter intensity c_s(z) = lambda_t / area."""
        return self.rate / self.area


def default_motion_model(p_survival: float = 0.99, p_detect: float = 0.9,
                         q_pos: float = 4.0, q_vel: float = 1.0,
                         r_pos: float = 9.0) -> MotionModel:
    """Constant-velocity model with one-frame time steps."""
    f = np.array([[1.0, 0.0, 1.0, 0.0],
                  [0.0, 1.0, 0.0, 1.0],
                  [0.0, 0.0, 1.0, 0.0],
                  [0.0, 0.0, 0.0, 1.0]])
    q = np.diag([q_pos, q_pos, q_vel, q_vel])
    h = np.array([[1.0, 0.0, 0.0, 0.0],
                  [0.0, 1.0, 0.0, 0.0]])
    r = np.diag([r_pos, r_pos])
    return MotionModel(f, q, h, r, p_survival, p_detect)


def birth_components(measurements, birth_cov=DEFAULT_BIRTH_COV,
                     birth_weight: float = DEFAULT_BIRTH_WEIGHT
                     ) -> list[GaussianComponent]:
    """One component per measurement, zero initial velocity."""
    cov = np.asarray(birth_cov, dtype=np.float64)
    if cov.ndim == 1:
        cov = np.diag(cov)
    births = []
    for z in measurements:
        mean = np.array([float(z[0]), float(z[1]), 0.0, 0.0])
        births.append(GaussianComponent(float(birth_weight), mean, cov.copy()))
    return births


def predict(mixture, model: MotionModel, births=()) -> list[GaussianComponent]:
    """Survival-scaled dynamics on every component, births appended unchanged."""
    out = []
    for c in mixture:
        mean = model.F @ c.mean
        cov = model.Q + model.F @ c.cov @ model.F.T
        out.append(GaussianComponent(c.weight * model.p_survival, mean,
                                     0.5 * (cov + cov.T)))
    out.extend(GaussianComponent(b.weight, b.mean.copy(), b.cov.copy())
               for b in births)
    return out


def _gauss2(z: np.ndarray, mean: np.ndarray, cov: np.ndarray,
            index: int) -> float:
    """2-D Gaussian density with an explicit inverse; raises on singularity."""
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0]
    if not np.isfinite(det) or det <= 0:
        raise NumericalError(
            f"singular innovation covariance for component {index}")
    d = z - mean
    quad = (cov[1, 1] * d[0] * d[0] - (cov[0, 1] + cov[1, 0]) * d[0] * d[1]
            + cov[0, 0] * d[1] * d[1]) / det
    return float(np.exp(-0.5 * quad) / (2.0 * np.pi * np.sqrt(det)))


def update(predicted, measurements, model: MotionModel,
           clutter: ClutterModel) -> list[GaussianComponent]:
    """Posterior mixture: missed-detection copies plus, per measurement,
    Kalman-updated copies of every predicted component with normalized
    weights."""
    p_d = model.p_detect
    out = [GaussianComponent(c.weight * (1.0 - p_d), c.mean.copy(),
                             c.cov.copy())
           for c in predicted]
    if not measurements:
        return out

    h, r = model.H, model.R
    eye = np.eye(4)
    gains, post_covs, innov_covs, pred_z = [], [], [], []
    for i, c in enumerate(predicted):
        s = r + h @ c.cov @ h.T
        det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
        if not np.isfinite(det) or det <= 0:
            raise NumericalError(
                f"singular innovation covariance for component {i}")
        k = c.cov @ h.T @ np.linalg.inv(s)
        p = (eye - k @ h) @ c.cov
        gains.append(k)
        post_covs.append(0.5 * (p + p.T))
        innov_covs.append(s)
        pred_z.append(h @ c.mean)

    for z in measurements:
        z = np.asarray(z, dtype=np.float64)
        likes = np.array([_gauss2(z, pred_z[i], innov_covs[i], i)
                          for i in range(len(predicted))])
        numer = p_d * np.array([c.weight for c in predicted]) * likes
        denom = clutter.density + numer.sum()
        for i, c in enumerate(predicted):
            weight = numer[i] / denom if denom > 0 else 0.0
            mean = c.mean + gains[i] @ (z - pred_z[i])
            out.append(GaussianComponent(float(weight), mean,
                                         post_covs[i].copy()))
    return out


def prune_and_merge(mixture, prune_threshold: float, merge_distance: float,
                    max_components: int) -> list[GaussianComponent]:
    """Drop weak components, greedily merge clusters around the heaviest
    survivor (Mahalanobis test under its inverse covariance, moment-matched
    merge), then cap the mixture at the heaviest ``max_components``."""
    alive = [c for c in mixture if c.weight >= prune_threshold]
    merged: list[GaussianComponent] = []
    remaining = list(range(len(alive)))
    while remaining:
        j = max(remaining, key=lambda i: (alive[i].weight, -i))
        pinv = np.linalg.inv(alive[j].cov)
        cluster = []
        for i in remaining:
            d = alive[i].mean - alive[j].mean
            if d @ pinv @ d <= merge_distance:
                cluster.append(i)
        w = sum(alive[i].weight for i in cluster)
        mean = sum(alive[i].weight * alive[i].mean for i in cluster) / w
        cov = np.zeros((4, 4))
        for i in cluster:
            d = mean - alive[i].mean
            cov += alive[i].weight * (alive[i].cov + np.outer(d, d))
        cov /= w
        merged.append(GaussianComponent(float(w), mean, 0.5 * (cov + cov.T)))
        remaining = [i for i in remaining if i not in cluster]
    if len(merged) > max_components:
        order = sorted(range(len(merged)),
                       key=lambda i: (-merged[i].weight, i))
        merged = [merged[i] for i in order[:max_components]]
    return merged


def max_weight_estimate(mixture) -> tuple[tuple[float, float], float]:
    """Position (H m) and weight of the heaviest component; ties go to the
    lowest index."""
    if not mixture:
        raise NoEstimateError("empty mixture has no estimate")
    best = max(range(len(mixture)), key=lambda i: (mixture[i].weight, -i))
    c = mixture[best]
    return ((float(c.mean[0]), float(c.mean[1])), float(c.weight))
