"""Appearance features: oriented-gradient descriptor, color names, windowing.

``extract_features`` turns an image patch into a (H, W, 42) cell grid:

* channels 0-17: contrast-sensitive gradient orientation bins,
* channels 18-26: contrast-insensitive orientation bins,
* channels 27-30: texture-energy channels,
* channels 31-40: color-name probabilities averaged per cell,
* channel 41: cell-averaged grayscale intensity, centered at 0.

Gradient channels are block-normalized with truncation at 0.2, so they lie
in [0, 1].  Color-name channels are probabilities summing to at most 1 per
cell (exactly 0 for grayscale input).
"""

from __future__ import annotations

import functools

import cv2
import numpy as np

from .errors import InvalidInputError

CELL_SIZE = 4
NUM_CHANNELS = 42
_NUM_ORIENT = 18          # contrast-sensitive bins over [0, 2*pi)
_TRUNCATION = 0.2
_NORM_EPS = 1e-10
_TEXTURE_GAIN = 1.0 / np.sqrt(_NUM_ORIENT)

CN_NAMES = ("black", "gray", "white", "red", "orange", "yellow",
            "green", "cyan", "blue", "purple")


# --------------------------------------------------------------------------
# windows

def hann_window(n: int) -> np.ndarray:
    """Periodic Hann vector sin^2(pi*k/n); degenerate length 1 gives [1.0]."""
    if n < 1:
        raise InvalidInputError(f"window length must be >= 1, got {n}")
    if n == 1:
        return np.ones(1)
    return np.sin(np.pi * np.arange(n) / n) ** 2


def window2d(grid_w: int, grid_h: int) -> np.ndarray:
    """Separable 2-D Hann window, zero along the first row and column."""
    return np.outer(hann_window(grid_h), hann_window(grid_w))


def apply_window(features: np.ndarray, window: np.ndarray | None = None) -> np.ndarray:
    """Multiply every channel by the 2-D window (built from the grid if omitted)."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 3:
        raise InvalidInputError(f"expected (H, W, D) features, got shape {features.shape}")
    if window is None:
        window = window2d(features.shape[1], features.shape[0])
    if window.shape != features.shape[:2]:
        raise InvalidInputError(
            f"window shape {window.shape} does not match grid {features.shape[:2]}")
    return features * window[:, :, np.newaxis]


# --------------------------------------------------------------------------
# patch cropping

def source_rect(center: tuple[float, float], base_size: tuple[float, float],
                scale: float, padding: float) -> tuple[int, int, int, int]:
    """Integer (x0, y0, w, h) of the padded search region in frame pixels."""
    bw, bh = base_size
    if bw <= 0 or bh <= 0 or scale <= 0:
        raise InvalidInputError(f"base_size and scale must be positive, got {base_size}, {scale}")
    sw = max(1, int(round(bw * (1.0 + padding) * scale)))
    sh = max(1, int(round(bh * (1.0 + padding) * scale)))
    x0 = int(round(center[0] - sw / 2.0))
    y0 = int(round(center[1] - sh / 2.0))
    return x0, y0, sw, sh


def crop_patch(frame: np.ndarray, center: tuple[float, float],
               base_size: tuple[float, float], scale: float, padding: float,
               template_size: tuple[int, int] | None = None) -> np.ndarray:
    """Crop the padded region around ``center`` and resample it to template size.

    Pixels outside the frame are replicated from the nearest border, so the
    crop is defined for any center.  ``template_size`` is the (w, h) of the
    canonical resampled patch; it defaults to the unscaled padded size.
    """
    frame = np.asarray(frame)
    if frame.ndim not in (2, 3) or frame.shape[0] < 1 or frame.shape[1] < 1:
        raise InvalidInputError(f"expected a non-empty (H, W[, C]) frame, got shape {frame.shape}")
    x0, y0, sw, sh = source_rect(center, base_size, scale, padding)
    if x0 >= 0 and y0 >= 0 and x0 + sw <= frame.shape[1] and y0 + sh <= frame.shape[0]:
        patch = frame[y0:y0 + sh, x0:x0 + sw]
    else:
        xs = np.clip(np.arange(x0, x0 + sw), 0, frame.shape[1] - 1)
        ys = np.clip(np.arange(y0, y0 + sh), 0, frame.shape[0] - 1)
        patch = frame[np.ix_(ys, xs)]
    if template_size is None:
        tw = max(1, int(round(base_size[0] * (1.0 + padding))))
        th = max(1, int(round(base_size[1] * (1.0 + padding))))
    else:
        tw, th = template_size
    if (patch.shape[1], patch.shape[0]) != (tw, th):
        patch = cv2.resize(patch, (tw, th), interpolation=cv2.INTER_LINEAR)
    elif patch.base is not None:
        patch = patch.copy()
    return patch


# --------------------------------------------------------------------------
# color-name lookup

def _build_cn_table() -> np.ndarray:
    """Probabilistic RGB -> 10 color-name table over 32x32x32 quantized bins."""
    levels = (np.arange(32, dtype=np.float64) * 8.0 + 4.0) / 255.0
    r = levels[:, None, None]
    g = levels[None, :, None]
    b = levels[None, None, :]
    shape = (32, 32, 32)
    r, g, b = np.broadcast_to(r, shape), np.broadcast_to(g, shape), np.broadcast_to(b, shape)

    v = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    c = v - mn
    sat = np.where(v > 0, c / np.maximum(v, 1e-12), 0.0)

    # hue in degrees, standard hexagonal formula
    hue = np.zeros(shape)
    safe_c = np.maximum(c, 1e-12)
    hr = np.mod((g - b) / safe_c, 6.0)
    hg = (b - r) / safe_c + 2.0
    hb = (r - g) / safe_c + 4.0
    hue = np.where(v == r, hr, np.where(v == g, hg, hb)) * 60.0
    hue = np.where(c > 0, hue, 0.0)

    # chromatic weight: saturated AND bright pixels carry hue information
    chroma = sat * np.clip(v * 2.0, 0.0, 1.0)

    # achromatic memberships over value
    ach = np.stack([
        np.exp(-0.5 * (v / 0.18) ** 2),            # black
        np.exp(-0.5 * ((v - 0.5) / 0.22) ** 2),    # gray
        np.exp(-0.5 * ((v - 1.0) / 0.18) ** 2),    # white
    ], axis=-1)
    ach /= np.sum(ach, axis=-1, keepdims=True)

    # chromatic memberships over the hue circle
    centers = np.array([0.0, 30.0, 60.0, 120.0, 180.0, 240.0, 300.0])  # red..purple
    widths = np.array([14.0, 12.0, 14.0, 25.0, 20.0, 25.0, 20.0])
    diff = np.abs(hue[..., None] - centers)
    diff = np.minimum(diff, 360.0 - diff)
    chrom = np.exp(-0.5 * (diff / widths) ** 2)
    chrom /= np.maximum(np.sum(chrom, axis=-1, keepdims=True), 1e-12)

    table = np.concatenate([ach * (1.0 - chroma)[..., None],
                            chrom * chroma[..., None]], axis=-1)
    table /= np.sum(table, axis=-1, keepdims=True)
    return table.astype(np.float32)


_CN_TABLE = _build_cn_table()  # immutable after import


# --------------------------------------------------------------------------
# oriented-gradient descriptor

@functools.lru_cache(maxsize=16)
def _binning_terms(rows: int, cols: int, cell: int):
    """Per-pixel bilinear cell-binning terms for a patch shape, precomputed.

    Each of the four terms is (target cell offset in histogram slots,
    bilinear weight), both per flattened pixel.  Contributions falling off
    the grid keep a zero weight and a clamped slot, so every pixel scatters
    with a fixed shape; the border cells are attenuated by the window anyway.
    """
    grid_h, grid_w = rows // cell, cols // cell
    cx = (np.arange(cols, dtype=np.float64) + 0.5) / cell - 0.5
    cy = (np.arange(rows, dtype=np.float64) + 0.5) / cell - 0.5
    ix0 = np.floor(cx).astype(np.int64)
    iy0 = np.floor(cy).astype(np.int64)
    fx = cx - ix0
    fy = cy - iy0
    ix0g, iy0g = np.meshgrid(ix0, iy0)
    fxg, fyg = np.meshgrid(fx, fy)
    terms = []
    for oy, wy in ((iy0g, 1.0 - fyg), (iy0g + 1, fyg)):
        for ox, wx in ((ix0g, 1.0 - fxg), (ix0g + 1, fxg)):
            valid = (ox >= 0) & (ox < grid_w) & (oy >= 0) & (oy < grid_h)
            slot = (np.clip(oy, 0, grid_h - 1) * grid_w
                    + np.clip(ox, 0, grid_w - 1)) * _NUM_ORIENT
            weight = np.where(valid, wy * wx, 0.0).astype(np.float32)
            terms.append((slot.ravel(), weight.ravel()))
    return grid_h, grid_w, tuple(terms)


def _gradient_histogram_stack(images: np.ndarray, cell: int) -> np.ndarray:
    """Orientation histograms (B, H, W) -> (B, gh, gw, 18), bilinear binning.

    Per pixel the gradient of the strongest color channel is snapped to the
    nearest of 18 orientations; its magnitude is shared bilinearly between
    the four surrounding cells.  Single precision throughout: descriptor
    noise sits far below the quantization noise of 8-bit input.
    """
    batch, rows, cols = images.shape[:3]
    grid_h, grid_w, terms = _binning_terms(rows, cols, cell)

    img = images.astype(np.float32)
    if img.ndim == 3:
        img = img[..., np.newaxis]
    dx = np.empty_like(img)
    dx[:, :, 1:-1] = img[:, :, 2:] - img[:, :, :-2]
    dx[:, :, 0] = img[:, :, 1] - img[:, :, 0]
    dx[:, :, -1] = img[:, :, -1] - img[:, :, -2]
    dy = np.empty_like(img)
    dy[:, 1:-1] = img[:, 2:] - img[:, :-2]
    dy[:, 0] = img[:, 1] - img[:, 0]
    dy[:, -1] = img[:, -1] - img[:, -2]

    mag2 = dx * dx + dy * dy
    # keep the gradient of the strongest channel; strict > preserves the
    # first-channel tie-break that argmax would give, at a fraction of the cost
    gx, gy, m2 = dx[..., 0], dy[..., 0], mag2[..., 0]
    for c in range(1, img.shape[3]):
        better = mag2[..., c] > m2
        gx = np.where(better, dx[..., c], gx)
        gy = np.where(better, dy[..., c], gy)
        m2 = np.where(better, mag2[..., c], m2)
    mag = np.sqrt(m2)

    angle = np.arctan2(gy, gx)
    bins = np.rint(angle * (_NUM_ORIENT / (2.0 * np.pi))).astype(np.int64) % _NUM_ORIENT
    bins_flat = bins.reshape(batch, -1)
    mag_flat = mag.reshape(batch, -1)

    per_image = grid_h * grid_w * _NUM_ORIENT
    offsets = np.arange(batch, dtype=np.int64)[:, None] * per_image
    size = batch * per_image
    base = offsets + bins_flat  # image offset + orientation, shared by all terms
    # one block per bilinear term, written in place: concatenating the four
    # term arrays instead costs an extra copy of ~3x the pixel count
    npix = base.size
    idx = np.empty(len(terms) * npix, dtype=np.int64)
    weights = np.empty(len(terms) * npix, dtype=np.float64)
    for k, (slot, weight) in enumerate(terms):
        block = slice(k * npix, (k + 1) * npix)
        np.add(base, slot[None, :], out=idx[block].reshape(base.shape))
        np.multiply(mag_flat, weight[None, :], out=weights[block].reshape(base.shape))
    hist = np.bincount(idx, weights=weights, minlength=size)
    return hist.reshape(batch, grid_h, grid_w, _NUM_ORIENT).astype(np.float32)


def _orientation_features_stack(hist: np.ndarray) -> np.ndarray:
    """Block-normalize orientation histograms into 31 channels (batched)."""
    grid_h, grid_w = hist.shape[1:3]
    half = _NUM_ORIENT // 2
    c9 = hist[..., :half] + hist[..., half:]
    energy = np.sum(c9 * c9, axis=-1)
    padded = np.pad(energy, ((0, 0), (1, 1), (1, 1)), mode="edge")

    blocks = np.stack(
        [padded[:, dy:dy + grid_h, dx_:dx_ + grid_w]
         + padded[:, dy:dy + grid_h, dx_ + 1:dx_ + 1 + grid_w]
         + padded[:, dy + 1:dy + 1 + grid_h, dx_:dx_ + grid_w]
         + padded[:, dy + 1:dy + 1 + grid_h, dx_ + 1:dx_ + 1 + grid_w]
         for dy in (0, 1) for dx_ in (0, 1)])
    norms = 1.0 / np.sqrt(blocks + np.float32(_NORM_EPS))

    out = np.zeros(hist.shape[:3] + (31,), dtype=hist.dtype)
    # the 0.5 block weight scales by a power of two, so applying it after
    # summing the four blocks is bit-exact
    for b in range(4):
        norm = norms[b][..., None]
        clipped = np.minimum(hist * norm, _TRUNCATION)
        out[..., :_NUM_ORIENT] += clipped
        out[..., _NUM_ORIENT:_NUM_ORIENT + half] += np.minimum(c9 * norm, _TRUNCATION)
        out[..., 27 + b] = _TEXTURE_GAIN * np.sum(clipped, axis=-1)
    out[..., :_NUM_ORIENT + half] *= 0.5
    return out


def _gradient_histogram(image: np.ndarray, cell: int) -> np.ndarray:
    return _gradient_histogram_stack(image[np.newaxis], cell)[0]


def _orientation_features(hist: np.ndarray) -> np.ndarray:
    return _orientation_features_stack(hist[np.newaxis])[0]


def hog_features(patch: np.ndarray, cell_size: int = CELL_SIZE) -> np.ndarray:
    """The 31 oriented-gradient channels alone (used by the scale filter)."""
    patch = np.asarray(patch)
    if patch.ndim not in (2, 3):
        raise InvalidInputError(f"expected (H, W[, C]) patch, got shape {patch.shape}")
    if patch.shape[0] // cell_size < 4 or patch.shape[1] // cell_size < 4:
        raise InvalidInputError(
            f"patch {patch.shape[1]}x{patch.shape[0]} yields fewer than 4x4 cells")
    return _orientation_features(_gradient_histogram(patch, cell_size))


def hog_features_stack(patches: np.ndarray, cell_size: int = CELL_SIZE) -> np.ndarray:
    """31 gradient channels for a stack of same-sized patches, one pass."""
    patches = np.asarray(patches)
    if patches.ndim not in (3, 4):
        raise InvalidInputError(f"expected (B, H, W[, C]) patches, got shape {patches.shape}")
    if patches.shape[1] // cell_size < 4 or patches.shape[2] // cell_size < 4:
        raise InvalidInputError(
            f"patches {patches.shape[2]}x{patches.shape[1]} yield fewer than 4x4 cells")
    return _orientation_features_stack(_gradient_histogram_stack(patches, cell_size))


def _cell_mean(values: np.ndarray, cell: int, grid_h: int, grid_w: int) -> np.ndarray:
    v = values[:grid_h * cell, :grid_w * cell]
    if v.ndim == 2:
        v = v[:, :, np.newaxis]
    d = v.shape[2]
    # two contiguous single-axis sums beat one strided mean(axis=(1, 3))
    rows = np.ascontiguousarray(v, dtype=np.float32).reshape(
        grid_h, cell, grid_w * cell * d).sum(axis=1)
    cells = rows.reshape(grid_h, grid_w, cell, d).sum(axis=2)
    return cells * np.float32(1.0 / (cell * cell))


def extract_features(patch: np.ndarray, cell_size: int = CELL_SIZE) -> np.ndarray:
    """Extract the 42-channel cell-grid feature map from an image patch."""
    patch = np.asarray(patch)
    if cell_size < 1:
        raise InvalidInputError(f"cell_size must be >= 1, got {cell_size}")
    if patch.ndim not in (2, 3) or (patch.ndim == 3 and patch.shape[2] not in (1, 3)):
        raise InvalidInputError(f"expected (H, W) or (H, W, {{1,3}}) patch, got shape {patch.shape}")
    grid_h = patch.shape[0] // cell_size
    grid_w = patch.shape[1] // cell_size
    if grid_h < 4 or grid_w < 4:
        raise InvalidInputError(
            f"patch {patch.shape[1]}x{patch.shape[0]} yields a {grid_w}x{grid_h} cell grid; "
            "at least 4x4 cells are required")

    color = patch.ndim == 3 and patch.shape[2] == 3
    out = np.zeros((grid_h, grid_w, NUM_CHANNELS), dtype=np.float32)
    if color:
        grad_input = patch
        # luminance averaged per cell; the cell mean commutes with the mix
        cell_rgb = _cell_mean(patch, cell_size, grid_h, grid_w)
        cell_gray = cell_rgb @ np.array([0.299, 0.587, 0.114], dtype=np.float32)
    else:
        grad_input = patch.astype(np.float32).reshape(patch.shape[0], patch.shape[1])
        cell_gray = _cell_mean(grad_input, cell_size, grid_h, grid_w)[:, :, 0]

    hist = _gradient_histogram(np.asarray(grad_input), cell_size)
    out[:, :, :31] = _orientation_features(hist)

    if color:
        # uint8 frames shift in place; anything else is quantized the slow way
        q = (patch if patch.dtype == np.uint8 else patch.astype(np.int64)) >> 3
        cn = _CN_TABLE[q[:, :, 0], q[:, :, 1], q[:, :, 2]]
        out[:, :, 31:41] = _cell_mean(cn, cell_size, grid_h, grid_w)

    out[:, :, 41] = cell_gray / 255.0 - 0.5
    return out
