"""Hand-crafted dense features and the multi-layer feature stack.

All feature maps are (M, N, D) arrays with M rows (vertical), N columns
(horizontal) and D channels. Cell-based features use a fixed cell of
``CELL_SIZE`` pixels; a patch of H x W pixels yields M = H // cell and
N = W // cell cells (trailing remainder pixels are ignored).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import mlhf
from .errors import DegenerateInputError, InputError

CELL_SIZE = 4
HOG_DIMS = 31
COLORNAME_DIMS = 11
DETECTOR_WINDOW = 32  # canonical pixel size of SVM detector patches

_HOG_EPS = 1e-4
_HOG_CLIP = 0.2
_HOG_ORIENTATIONS = 9


@dataclass
class ImagePatch:
    """Pixel block cut from a frame; origin is the patch top-left in frame coords."""

    pixels: np.ndarray  # (H, W, 3), values in [0, 255]
    origin: tuple[float, float] = (0.0, 0.0)

    @property
    def size(self) -> tuple[int, int]:
        h, w = self.pixels.shape[:2]
        return (w, h)


@dataclass
class FeatureLayer:
    """One dense feature map plus its fusion weight."""

    data: np.ndarray  # (M, N, D)
    layer_id: int = 1
    weight: float = 1.0


@dataclass
class FeatureStack:
    """Ordered feature layers sharing one spatial grid."""

    layers: list[FeatureLayer] = field(default_factory=list)

    def __post_init__(self):
        sizes = {layer.data.shape[:2] for layer in self.layers}
        if len(sizes) > 1:
            raise InputError(f"stack layers disagree on spatial size: {sorted(sizes)}")

    @property
    def spatial_size(self) -> tuple[int, int]:
        return self.layers[0].data.shape[:2]

    def __len__(self) -> int:
        return len(self.layers)


def _pixels(patch) -> np.ndarray:
    return patch.pixels if isinstance(patch, ImagePatch) else np.asarray(patch)


def crop_patch(image: np.ndarray, center: tuple[float, float],
               size: tuple[int, int]) -> ImagePatch:
    """Cut a (w, h) patch centered at ``center``, replicating edge pixels
    where the patch extends past the frame."""
    w, h = int(size[0]), int(size[1])
    if w < 1 or h < 1:
        raise DegenerateInputError(f"patch size must be >= 1, got {size}")
    img_h, img_w = image.shape[:2]
    xs = int(np.floor(center[0])) - w // 2 + np.arange(w)
    ys = int(np.floor(center[1])) - h // 2 + np.arange(h)
    origin = (float(xs[0]), float(ys[0]))
    xs = np.clip(xs, 0, img_w - 1)
    ys = np.clip(ys, 0, img_h - 1)
    return ImagePatch(image[ys[:, None], xs[None, :]].copy(), origin)


def bilinear_resize(arr: np.ndarray, out_hw: tuple[int, int]) -> np.ndarray:
    """Bilinear resample of the two leading spatial axes.

    Accepts (H, W) or (..., H, W, C) with channels last; the output grid is
    aligned to the input corners so constants and linear ramps are preserved
    exactly and equal sizes are an identity copy.
    """
    out_h, out_w = int(out_hw[0]), int(out_hw[1])
    if out_h < 1 or out_w < 1:
        raise InputError(f"resize target must be >= 1, got {out_hw}")
    squeeze = arr.ndim == 2
    a = arr[..., None] if squeeze else arr
    h, w = a.shape[-3], a.shape[-2]
    if (h, w) == (out_h, out_w):
        out = a.copy()
    else:
        a = a.astype(np.float64, copy=False)
        ys = np.full(out_h, (h - 1) / 2.0) if out_h == 1 else \
            np.arange(out_h) * ((h - 1) / (out_h - 1))
        xs = np.full(out_w, (w - 1) / 2.0) if out_w == 1 else \
            np.arange(out_w) * ((w - 1) / (out_w - 1))
        y0 = np.floor(ys).astype(np.intp)
        x0 = np.floor(xs).astype(np.intp)
        y1 = np.minimum(y0 + 1, h - 1)
        x1 = np.minimum(x0 + 1, w - 1)
        wy = (ys - y0)[:, None, None]
        wx = (xs - x0)[:, None]
        rows = (np.take(a, y0, axis=-3) * (1.0 - wy)
                + np.take(a, y1, axis=-3) * wy)
        out = (np.take(rows, x0, axis=-2) * (1.0 - wx)
               + np.take(rows, x1, axis=-2) * wx)
    return out[..., 0] if squeeze else out


def _pool_cells(a: np.ndarray, cell_size: int) -> np.ndarray:
    """Average-pool (..., H, W, C) over cell_size x cell_size blocks."""
    h, w = a.shape[-3], a.shape[-2]
    m, n = h // cell_size, w // cell_size
    a = a[..., : m * cell_size, : n * cell_size, :]
    shape = a.shape[:-3] + (m, cell_size, n, cell_size, a.shape[-1])
    return a.reshape(shape).mean(axis=(-4, -2))


def _max_channel_gradients(img: np.ndarray):
    """Per-pixel gradient of the color channel with the largest magnitude.

    Centered differences with replicated borders (no 1/2 factor; the HOG
    normalization cancels any global gradient scale).
    """
    padx = np.pad(img, [(0, 0)] * (img.ndim - 3) + [(0, 0), (1, 1), (0, 0)],
                  mode="edge")
    dx = padx[..., :, 2:, :] - padx[..., :, :-2, :]
    pady = np.pad(img, [(0, 0)] * (img.ndim - 3) + [(1, 1), (0, 0), (0, 0)],
                  mode="edge")
    dy = pady[..., 2:, :, :] - pady[..., :-2, :, :]
    v = dx * dx + dy * dy
    pick = np.argmax(v, axis=-1)[..., None]
    take = lambda a: np.take_along_axis(a, pick, axis=-1)[..., 0]
    return take(dx), take(dy), take(v)


def extract_hog(patch, cell_size: int = CELL_SIZE) -> np.ndarray:
    """31-channel HOG feature map (Felzenszwalb variant).

    Channels: 18 contrast-sensitive orientations, 9 contrast-insensitive
    orientations, 4 normalization/texture channels. Accepts a single patch
    (H, W, 3) or a batch (..., H, W, 3); returns (..., M, N, 31) with
    M = H // cell_size, N = W // cell_size.
    """
    img = np.asarray(_pixels(patch), dtype=np.float64)
    if img.ndim < 3 or img.shape[-1] != 3:
        raise InputError(f"expected (..., H, W, 3) pixels, got shape {img.shape}")
    single = img.ndim == 3
    if single:
        img = img[None]
    lead = img.shape[:-3]
    img = img.reshape((-1,) + img.shape[-3:])
    out = _hog_from_gradients(img, cell_size,
                              *_max_channel_gradients(img)).reshape(
        lead + (img.shape[1] // cell_size, img.shape[2] // cell_size, HOG_DIMS))
    return out[0] if single else out


def _hog_from_gradients(img: np.ndarray, cell_size: int, dx: np.ndarray,
                        dy: np.ndarray, v: np.ndarray) -> np.ndarray:
    b, h, w, _ = img.shape
    m, n = h // cell_size, w // cell_size
    if m < 1 or n < 1:
        raise DegenerateInputError(
            f"patch {w}x{h} smaller than one {cell_size}px cell")
    hc, wc = m * cell_size, n * cell_size
    dx, dy, v = dx[:, :hc, :wc], dy[:, :hc, :wc], v[:, :hc, :wc]
    mag = np.sqrt(v)
    orient = np.floor((np.arctan2(dy, dx) + np.pi) * (18.0 / (2.0 * np.pi)))
    orient = orient.astype(np.intp)
    orient[orient == 18] = 0  # arctan2 == +pi wraps to the first bin

    # bilinear binning of magnitudes into the cell grid
    cy = (np.arange(hc) + 0.5) / cell_size - 0.5
    cx = (np.arange(wc) + 0.5) / cell_size - 0.5
    y0 = np.floor(cy).astype(np.intp)
    x0 = np.floor(cx).astype(np.intp)
    wy1 = cy - y0
    wx1 = cx - x0
    y0c, y1c = np.clip(y0, 0, m - 1), np.clip(y0 + 1, 0, m - 1)
    x0c, x1c = np.clip(x0, 0, n - 1), np.clip(x0 + 1, 0, n - 1)

    hist = np.zeros(b * m * n * 18)
    batch_off = (np.arange(b) * m)[:, None, None]
    for ys, xs, wgt in (
        (y0c, x0c, (1 - wy1)[:, None] * (1 - wx1)[None, :]),
        (y0c, x1c, (1 - wy1)[:, None] * wx1[None, :]),
        (y1c, x0c, wy1[:, None] * (1 - wx1)[None, :]),
        (y1c, x1c, wy1[:, None] * wx1[None, :]),
    ):
        idx = ((batch_off + ys[None, :, None]) * n + xs[None, None, :]) * 18 + orient
        hist += np.bincount(idx.ravel(), weights=(mag * wgt[None]).ravel(),
                            minlength=hist.size)
    hist = hist.reshape(b, m, n, 18)

    # gradient energy per cell over undirected orientations
    undirected = hist[..., :9] + hist[..., 9:]
    energy = np.sum(undirected ** 2, axis=-1)
    ep = np.pad(energy, ((0, 0), (1, 1), (1, 1)), mode="edge")
    blocks = ep[:, :-1, :-1] + ep[:, :-1, 1:] + ep[:, 1:, :-1] + ep[:, 1:, 1:]
    norms = 1.0 / np.sqrt(blocks + _HOG_EPS)  # (b, m+1, n+1)
    corner_norms = (norms[:, :-1, :-1], norms[:, :-1, 1:],
                    norms[:, 1:, :-1], norms[:, 1:, 1:])

    out = np.zeros((b, m, n, HOG_DIMS))
    for k, nk in enumerate(corner_norms):
        nk = nk[..., None]
        sens = np.minimum(hist * nk, _HOG_CLIP)
        out[..., :18] += 0.5 * sens
        out[..., 18:27] += 0.5 * np.minimum(undirected * nk, _HOG_CLIP)
        out[..., 27 + k] = 0.2357 * sens.sum(axis=-1)
    return out


def rgb_to_luv(rgb: np.ndarray) -> np.ndarray:
    """CIE LUV coordinates of RGB pixels in [0, 1], rescaled channelwise to [0, 1].

    Uses Rec.709 primaries with D65 white; the usual 8-bit ranges
    L in [0, 100], u in [-134, 220], v in [-140, 122] are mapped linearly
    onto [0, 1].
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    x = 0.412453 * r + 0.357580 * g + 0.180423 * b
    y = 0.212671 * r + 0.715160 * g + 0.072169 * b
    z = 0.019334 * r + 0.119193 * g + 0.950227 * b
    lum = np.where(y > 0.008856, 116.0 * np.cbrt(y) - 16.0, 903.3 * y)
    denom = x + 15.0 * y + 3.0 * z
    safe = np.maximum(denom, 1e-12)
    u_prime = np.where(denom > 0, 4.0 * x / safe, 0.0)
    v_prime = np.where(denom > 0, 9.0 * y / safe, 0.0)
    xn, zn = 0.950456, 1.088754
    dn = xn + 15.0 + 3.0 * zn
    u = 13.0 * lum * (u_prime - 4.0 * xn / dn)
    v = 13.0 * lum * (v_prime - 9.0 / dn)
    return np.stack([lum / 100.0, (u + 134.0) / 354.0, (v + 140.0) / 262.0],
                    axis=-1)


def extract_color_names(patch, table: np.ndarray,
                        cell_size: int = CELL_SIZE) -> np.ndarray:
    """Per-cell mean color-name probabilities, (M, N, 11).

    RGB values are quantized to 5 bits per channel and looked up in the
    32768 x 11 table; per-pixel rows are average-pooled over cells, which
    preserves the row sum of 1.
    """
    img = np.asarray(_pixels(patch))
    if img.ndim < 3 or img.shape[-1] != 3:
        raise InputError(f"expected (..., H, W, 3) pixels, got shape {img.shape}")
    if table.shape != (32768, COLORNAME_DIMS):
        raise InputError(f"color-name table must be (32768, 11), got {table.shape}")
    q = np.clip(img, 0, 255).astype(np.uint16) >> 3
    idx = q[..., 0] * 1024 + q[..., 1] * 32 + q[..., 2]
    probs = table[idx].astype(np.float64)
    return _pool_cells(probs, cell_size)


def build_handcrafted_layer(patch, table: np.ndarray,
                            cell_size: int = CELL_SIZE) -> np.ndarray:
    """HOG (31) and color-name (11) channels concatenated to a 42-dim map."""
    hog = extract_hog(patch, cell_size)
    names = extract_color_names(patch, table, cell_size)
    return np.concatenate([hog, names], axis=-1)


def extract_detector_features(patch) -> np.ndarray:
    """Flat feature vector for the re-detection SVM.

    The patch must already be at the canonical 32 x 32 detector window.
    Layout: 8 x 8 cells in row-major order, each cell contributing
    31 HOG values, 3 mean-LUV values and 1 mean normalized gradient
    magnitude (2240 values total). Accepts (..., 32, 32, 3) batches.
    """
    img = np.asarray(_pixels(patch), dtype=np.float64)
    if img.shape[-3:] != (DETECTOR_WINDOW, DETECTOR_WINDOW, 3):
        raise InputError(
            f"detector patch must be {DETECTOR_WINDOW}x{DETECTOR_WINDOW}x3, "
            f"got {img.shape}")
    single = img.ndim == 3
    if single:
        img = img[None]
    lead = img.shape[:-3]
    img = img.reshape((-1,) + img.shape[-3:])
    dx, dy, v = _max_channel_gradients(img)
    hog = _hog_from_gradients(img, CELL_SIZE, dx, dy, v)
    luv = _pool_cells(rgb_to_luv(img / 255.0), CELL_SIZE)
    mag = np.sqrt(v)
    peak = mag.max(axis=(-2, -1), keepdims=True)
    gm = _pool_cells((mag / (peak + 1e-12))[..., None], CELL_SIZE)
    cells = np.concatenate([hog, luv, gm], axis=-1)
    flat = cells.reshape(lead + (-1,))
    return flat[0] if single else flat


def cosine_window(m: int, n: int) -> np.ndarray:
    """Outer product of 1-D Hann windows (zero at all four borders)."""
    if m < 2 or n < 2:
        raise DegenerateInputError(f"window needs M, N >= 2, got {m}x{n}")
    return np.outer(np.hanning(m), np.hanning(n))


def apply_cosine_window(layer: np.ndarray, window: np.ndarray | None = None) -> np.ndarray:
    """Multiply every channel elementwise by the 2-D Hann window."""
    m, n = layer.shape[:2]
    if window is None:
        window = cosine_window(m, n)
    return layer * window[:, :, None]


def standardize_layer(layer: np.ndarray) -> np.ndarray:
    """Remove the per-channel spatial mean (applied before windowing)."""
    return layer - layer.mean(axis=(0, 1), keepdims=True)


def resize_layer(layer: np.ndarray, target: tuple[int, int]) -> np.ndarray:
    """Bilinearly resample a feature map to (M, N) cells."""
    return bilinear_resize(layer, target)


def load_deep_layers(path, expected_spatial: tuple[int, int]) -> list[FeatureLayer]:
    """Read one frame's deep-feature file and resize every layer to the
    translation grid. Layer count and channel depths come from the header."""
    arrays = mlhf.read_layers(path)
    return [FeatureLayer(resize_layer(a.astype(np.float64), expected_spatial),
                         layer_id=i + 1)
            for i, a in enumerate(arrays)]


def build_feature_stack(patch, table: np.ndarray, cell_size: int = CELL_SIZE,
                        deep_path=None, deep_gammas=(0.02, 0.4, 1.0),
                        handcrafted_gamma: float = 0.1) -> FeatureStack:
    """Assemble the full multi-layer stack for one search-window patch.

    Every layer is standardized to zero mean per channel and then weighted
    by the cosine window. Without a deep-feature file the stack is the
    single hand-crafted layer with weight renormalized to 1.
    """
    hand = build_handcrafted_layer(patch, table, cell_size)
    m, n = hand.shape[:2]
    window = cosine_window(m, n)
    layers = []
    if deep_path is not None:
        deep = load_deep_layers(deep_path, (m, n))
        if len(deep) != len(deep_gammas):
            raise InputError(
                f"deep file has {len(deep)} layers but {len(deep_gammas)} "
                "weights are configured")
        for layer, gamma in zip(deep, deep_gammas):
            data = apply_cosine_window(standardize_layer(layer.data), window)
            layers.append(FeatureLayer(data, layer.layer_id, float(gamma)))
        hand_gamma = handcrafted_gamma
    else:
        hand_gamma = 1.0
    layers.append(FeatureLayer(apply_cosine_window(standardize_layer(hand), window),
                               layer_id=len(layers) + 1, weight=float(hand_gamma)))
    return FeatureStack(layers)
