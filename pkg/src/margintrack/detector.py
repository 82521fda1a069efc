"""Target detection: response maps, multiple peaks, re-detection at each peak.

A response map scores every wrapped displacement hypothesis of the target
inside the search patch; the peak index, decoded as a wrapped shift, is the
displacement in feature cells.  Because the window attenuates off-center
content, a distractor near the patch center can out-score the true target
sitting off-center.  Multimodal detection therefore re-crops the frame at
every strong secondary peak and re-scores with the same model, keeping the
candidate whose own response peak is highest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalError
from .features import apply_window, crop_patch, extract_features, source_rect
from .optimizer import DualModel
from .spectral import dft2, gaussian_kernel_corr, idft2, linear_kernel_corr

MAX_SECONDARY_PEAKS = 5


@dataclass(frozen=True)
class ResponseMap:
    values: np.ndarray           # (H, W) float64
    peak_pos: tuple[int, int]    # (w, h) grid index of the global maximum
    f_max: float
    f_min: float


@dataclass(frozen=True)
class PeakSet:
    """Retained local maxima; entry 0 is always the global maximum."""

    positions: list[tuple[int, int]]  # (w, h) grid indices
    values: list[float]


@dataclass(frozen=True)
class PatchGeometry:
    """Fixed cropping geometry of one tracker instance."""

    base_size: tuple[float, float]   # target (w, h) in frame px at scale 1
    padding: float
    template_size: tuple[int, int]   # canonical resampled patch (w, h) px
    cell_size: int
    template_scale: tuple[float, float]  # frame px per template px at scale 1, (x, y)

    def cells_to_px(self, scale: float) -> tuple[float, float]:
        """Frame pixels spanned by one feature cell at the given scale, per axis."""
        return (self.cell_size * self.template_scale[0] * scale,
                self.cell_size * self.template_scale[1] * scale)


@dataclass(frozen=True)
class Detection:
    center: tuple[float, float]
    response: ResponseMap            # winning response map
    f_max: float
    primary_f_max: float
    peaks_considered: int
    failed: bool = False


def windowed_features(frame: np.ndarray, center: tuple[float, float],
                      geom: PatchGeometry, scale: float,
                      window: np.ndarray) -> np.ndarray:
    """Crop at ``center``, extract the 42-channel map, and window it."""
    patch = crop_patch(frame, center, geom.base_size, scale, geom.padding,
                       geom.template_size)
    return apply_window(extract_features(patch, geom.cell_size), window)


def respond(model: DualModel, features: np.ndarray) -> ResponseMap:
    """Score all wrapped displacement hypotheses of a windowed candidate patch.

    If the candidate equals the training patch cyclically shifted by
    (dx, dy) cells, the map peaks exactly at (dx, dy).
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 3 or features.shape[:2] != model.grid or \
            features.shape[2] != model.template_hat.shape[2]:
        raise InvalidInputError(
            f"candidate features {features.shape} do not match model "
            f"{model.template_hat.shape}")
    s_hat = dft2(features)
    if model.mode == "linear":
        values = idft2(linear_kernel_corr(model.w_hat, s_hat))
    elif model.mode == "kernel-linear":
        values = idft2(linear_kernel_corr(model.template_hat, s_hat) * model.alpha_hat)
    else:
        values = idft2(gaussian_kernel_corr(model.template_hat, s_hat, model.sigma_k)
                       * model.alpha_hat)
    if not np.all(np.isfinite(values)):
        raise NumericalError("response map contains non-finite values")
    flat = int(np.argmax(values))  # first occurrence in row-major order
    py, px = divmod(flat, values.shape[1])
    return ResponseMap(values=values, peak_pos=(px, py),
                       f_max=float(values[py, px]), f_min=float(np.min(values)))


def _wrapped_dist(a: tuple[int, int], b: tuple[int, int], w: int, h: int) -> float:
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    return math.hypot(min(dx, w - dx), min(dy, h - dy))


def find_peaks(response: ResponseMap, theta: float,
               max_secondary: int = MAX_SECONDARY_PEAKS) -> PeakSet:
    """Strict 8-connected wrapped local maxima above theta * global max.

    Peaks are ordered by value descending (global maximum first, row-major
    index breaking ties); peaks within ceil(min(W,H)/10) wrapped Euclidean
    distance of a stronger retained peak are suppressed, and at most
    ``max_secondary`` secondary peaks are kept.
    """
    if not 0.0 <= theta <= 1.0:
        raise InvalidInputError(f"theta must be in [0, 1], got {theta}")
    if isinstance(response, np.ndarray):
        flat = int(np.argmax(response))
        h_, w_ = response.shape
        response = ResponseMap(values=response,
                               peak_pos=(flat % w_, flat // w_),
                               f_max=float(response.max()),
                               f_min=float(response.min()))
    v = response.values
    h, w = v.shape
    strict = np.ones_like(v, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            strict &= v > np.roll(v, (dy, dx), axis=(0, 1))
    gx, gy = response.peak_pos
    strict[gy, gx] = True  # the global max is always a peak, plateaus included
    ys, xs = np.nonzero(strict)
    order = sorted(range(len(ys)),
                   key=lambda i: (-v[ys[i], xs[i]], ys[i] * w + xs[i]))

    radius = math.ceil(min(w, h) / 10)
    positions: list[tuple[int, int]] = [(gx, gy)]
    values: list[float] = [response.f_max]
    for i in order:
        pos = (int(xs[i]), int(ys[i]))
        if pos == (gx, gy):
            continue
        if len(positions) - 1 >= max_secondary:
            break
        value = float(v[pos[1], pos[0]])
        if response.f_max <= 0 or value / response.f_max < theta:
            continue  # ratio test needs a positive top peak
        if any(_wrapped_dist(pos, kept, w, h) <= radius for kept in positions):
            continue
        positions.append(pos)
        values.append(value)
    return PeakSet(positions=positions, values=values)


def wrapped_shift(pos: tuple[int, int], grid: tuple[int, int]) -> tuple[int, int]:
    """Decode a grid index into a signed displacement; s > size/2 wraps to s - size."""
    out = []
    for s, size in zip(pos, grid):
        out.append(s if s <= size / 2 else s - size)
    return out[0], out[1]


def multimodal_detect(model: DualModel, frame: np.ndarray,
                      center: tuple[float, float], geom: PatchGeometry,
                      scale: float, window: np.ndarray, theta: float,
                      multimodal: bool = True) -> Detection:
    """Locate the target near ``center``: primary detection plus re-detections.

    With ``multimodal`` off only the primary response peak is used.  The
    winning candidate is the response map with the highest peak; ties keep
    the earliest candidate, so the primary map wins exact ties.
    """
    fh, fw = frame.shape[:2]
    x0, y0, sw, sh = source_rect(center, geom.base_size, scale, geom.padding)
    if x0 + sw <= 0 or y0 + sh <= 0 or x0 >= fw or y0 >= fh:
        # search region has left the frame entirely: hold position
        empty = ResponseMap(values=np.zeros((1, 1)), peak_pos=(0, 0), f_max=0.0, f_min=0.0)
        return Detection(center=center, response=empty, f_max=0.0,
                         primary_f_max=0.0, peaks_considered=0, failed=True)

    grid_w, grid_h = model.grid[1], model.grid[0]
    px_x, px_y = geom.cells_to_px(scale)

    primary = respond(model, windowed_features(frame, center, geom, scale, window))
    if multimodal:
        peaks = find_peaks(primary, theta)
    else:
        peaks = PeakSet(positions=[primary.peak_pos], values=[primary.f_max])

    candidates: list[tuple[ResponseMap, tuple[float, float]]] = [(primary, center)]
    for pos in peaks.positions[1:]:
        dx, dy = wrapped_shift(pos, (grid_w, grid_h))
        re_center = (center[0] + dx * px_x, center[1] + dy * px_y)
        candidates.append(
            (respond(model, windowed_features(frame, re_center, geom, scale, window)),
             re_center))

    best, best_center = candidates[0]
    for cand, cand_center in candidates[1:]:
        if cand.f_max > best.f_max:
            best, best_center = cand, cand_center
    dx, dy = wrapped_shift(best.peak_pos, (grid_w, grid_h))
    new_center = (best_center[0] + dx * px_x, best_center[1] + dy * px_y)
    return Detection(center=new_center, response=best, f_max=best.f_max,
                     primary_f_max=primary.f_max, peaks_considered=len(peaks.positions))
