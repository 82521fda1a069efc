"""Structured-output label fields over the grid of cyclic shifts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class LabelField:
    """Gaussian score surface over shifts plus its margin-loss square root.

    ``score`` peaks at exactly 1.0 at shift (0, 0).  ``loss_root`` is
    sqrt(1 - score): the square root of the margin loss between the zero
    shift and each displaced shift, which is the quantity subtracted from
    the target plane during training.
    """

    score: np.ndarray      # (H, W) float64, values in (0, 1]
    loss_root: np.ndarray  # (H, W) float64, values in [0, 1), 0 at (0, 0)
    sigma: float


def _wrapped_offsets(n: int) -> np.ndarray:
    """Signed wrapped distances 0, 1, ..., floor(n/2), -(ceil(n/2)-1), ..., -1."""
    idx = np.arange(n, dtype=np.float64)
    return np.where(idx <= n / 2.0, idx, idx - n)


def build_labels(grid_w: int, grid_h: int, target_cells: tuple[float, float],
                 sigma_factor: float = 0.1) -> LabelField:
    """Build the label field for a grid_w x grid_h shift grid.

    ``target_cells`` is the (width, height) of the target in feature cells;
    the Gaussian bandwidth is sigma_factor * sqrt(tw * th) cells, so larger
    targets tolerate proportionally larger displacements.
    """
    if grid_w < 1 or grid_h < 1:
        raise InvalidInputError(f"grid must be at least 1x1, got {grid_w}x{grid_h}")
    tw, th = target_cells
    if tw <= 0 or th <= 0:
        raise InvalidInputError(f"target size in cells must be positive, got {target_cells}")
    if sigma_factor <= 0:
        raise InvalidInputError(f"sigma_factor must be positive, got {sigma_factor}")
    sigma = sigma_factor * float(np.sqrt(tw * th))
    dx = _wrapped_offsets(grid_w)
    dy = _wrapped_offsets(grid_h)
    dist2 = dy[:, np.newaxis] ** 2 + dx[np.newaxis, :] ** 2
    score = np.exp(-dist2 / (2.0 * sigma * sigma))
    score[0, 0] = 1.0  # exact peak; exp(0) is 1 but keep it explicit
    loss_root = np.sqrt(np.clip(1.0 - score, 0.0, None))
    return LabelField(score=score, loss_root=loss_root, sigma=sigma)
