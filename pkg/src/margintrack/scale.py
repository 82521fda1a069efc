"""One-dimensional discriminative scale filter over a pyramid of crops.

Each frame, target-sized crops are taken at a geometric ladder of relative
scales, resampled to a small fixed template, and described by the oriented
gradient channels.  A 1-D correlation filter over the scale axis is trained
so its response peaks at the current scale; after a size change the peak
moves to the matching ladder level, whose factor multiplies the running
scale estimate.  Scale is estimated every frame but the filter is trained
only on high-confidence frames.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidInputError
from .features import crop_patch, hog_features_stack

_MIN_TEMPLATE_PX = 16  # 4x4 cells at the default cell size


@dataclass(frozen=True)
class ScaleModel:
    base_size: tuple[float, float]    # target (w, h) px at scale 1
    factors: np.ndarray               # (S,) ladder of relative scale factors
    label_hat: np.ndarray             # (S,) complex spectrum of the Gaussian label
    window: np.ndarray                # (S,) Hann taper over ladder levels
    template_size: tuple[int, int]    # (w, h) px of the per-level resample target
    cell_size: int
    lam: float                        # ridge regularizer
    num_hat: np.ndarray | None        # (D, S) complex learned numerator
    den: np.ndarray | None            # (S,) real learned denominator

    @property
    def num_scales(self) -> int:
        return len(self.factors)

    @property
    def trained(self) -> bool:
        return self.num_hat is not None


def make_scale_model(base_size: tuple[float, float], num_scales: int = 33,
                     factor: float = 1.02, sigma: float = 1.0, lam: float = 1e-2,
                     max_side: int = 32, cell_size: int = 4) -> ScaleModel:
    """Untrained scale model with its ladder, label, and window precomputed."""
    if num_scales < 1:
        raise InvalidInputError(f"num_scales must be >= 1, got {num_scales}")
    if factor <= 1.0 and num_scales > 1:
        raise InvalidInputError(f"scale factor must exceed 1, got {factor}")
    bw, bh = base_size
    if bw <= 0 or bh <= 0:
        raise InvalidInputError(f"base_size must be positive, got {base_size}")
    mid = (num_scales - 1) // 2
    exponents = np.arange(num_scales, dtype=np.float64) - mid
    factors = factor ** exponents
    label = np.exp(-0.5 * ((np.arange(num_scales) - mid) / sigma) ** 2)
    window = np.hanning(num_scales) if num_scales > 1 else np.ones(1)
    longer = max(bw, bh)
    tw = max(_MIN_TEMPLATE_PX, int(round(max_side * bw / longer)))
    th = max(_MIN_TEMPLATE_PX, int(round(max_side * bh / longer)))
    return ScaleModel(base_size=(float(bw), float(bh)), factors=factors,
                      label_hat=np.fft.fft(label), window=window,
                      template_size=(tw, th), cell_size=cell_size, lam=lam,
                      num_hat=None, den=None)


def scale_features(model: ScaleModel, frame: np.ndarray,
                   center: tuple[float, float], current_scale: float) -> np.ndarray:
    """Windowed (D, S) feature matrix: one descriptor column per ladder level.

    Levels whose crop would collapse below 2 px a side are zero-filled.
    """
    levels, patches = [], []
    for i, f in enumerate(model.factors):
        sw = model.base_size[0] * current_scale * f
        sh = model.base_size[1] * current_scale * f
        if round(sw) < 2 or round(sh) < 2:
            continue
        levels.append(i)
        patches.append(crop_patch(frame, center, (sw, sh), 1.0, 0.0,
                                  model.template_size))
    if not levels:
        raise InvalidInputError("every scale ladder level produced a degenerate crop")
    columns = hog_features_stack(np.stack(patches), model.cell_size)
    out = np.zeros((columns[0].size, model.num_scales))
    for column, i in zip(columns, levels):
        out[:, i] = column.ravel() * model.window[i]
    return out


def train_scale(model: ScaleModel, frame: np.ndarray, center: tuple[float, float],
                current_scale: float, eta: float,
                features: np.ndarray | None = None) -> ScaleModel:
    """Blend per-level correlation statistics toward the current frame.

    The first call (untrained model) takes the frame's statistics verbatim.
    ``features`` may pass a pyramid already extracted at the same
    (frame, center, scale), sparing a second extraction.
    """
    if not 0.0 < eta <= 1.0:
        raise InvalidInputError(f"eta must be in (0, 1], got {eta}")
    if features is None:
        features = scale_features(model, frame, center, current_scale)
    x_hat = np.fft.fft(features, axis=1)
    new_num = model.label_hat[np.newaxis, :] * np.conj(x_hat)
    new_den = np.sum(np.real(x_hat * np.conj(x_hat)), axis=0)
    if not model.trained:
        return replace(model, num_hat=new_num, den=new_den)
    if new_num.shape != model.num_hat.shape:
        raise InvalidInputError(
            f"scale feature dimension changed: {new_num.shape} vs {model.num_hat.shape}")
    return replace(model,
                   num_hat=(1.0 - eta) * model.num_hat + eta * new_num,
                   den=(1.0 - eta) * model.den + eta * new_den)


def estimate_scale(model: ScaleModel, frame: np.ndarray,
                   center: tuple[float, float], current_scale: float,
                   features: np.ndarray | None = None) -> float:
    """Scale estimate for the current frame; unchanged for an untrained model."""
    if not model.trained or model.num_scales == 1:
        return current_scale
    if features is None:
        features = scale_features(model, frame, center, current_scale)
    z_hat = np.fft.fft(features, axis=1)
    spectrum = np.sum(model.num_hat * z_hat, axis=0) / (model.den + model.lam)
    response = np.real(np.fft.ifft(spectrum))
    return current_scale * float(model.factors[int(np.argmax(response))])
