"""2-D spectral machinery for circulant-sample correlation.

Conventions used across the package:

* Arrays are laid out (H, W) or (H, W, D) with row index = vertical cell.
* Forward DFT is unnormalized; the inverse carries the 1/(W*H) factor
  (numpy's default), so round trips are exact to float precision.
* Cross-correlations conjugate their *first* argument, which is always the
  stored/template side.  With that rule, if ``b`` equals ``a`` cyclically
  rolled by (dy, dx), the spatial cross-correlation peaks exactly at
  (dy, dx).
"""

from __future__ import annotations

import numpy as np
import scipy.fft

from .errors import InvalidInputError, NumericalError


def dft2(x: np.ndarray) -> np.ndarray:
    """Per-channel unnormalized forward 2-D DFT over the first two axes."""
    x = np.asarray(x)
    if x.ndim not in (2, 3) or x.shape[0] < 1 or x.shape[1] < 1:
        raise InvalidInputError(f"expected (H, W) or (H, W, D) array, got shape {x.shape}")
    if x.dtype != np.float64 and not np.iscomplexobj(x):
        x = x.astype(np.float64)
    return scipy.fft.fft2(x, axes=(0, 1))


def idft2(x_hat: np.ndarray) -> np.ndarray:
    """Inverse 2-D DFT with 1/(W*H) normalization; returns the real part.

    Inputs produced by correlating real-valued maps are Hermitian, so the
    imaginary residue is float noise and is dropped.
    """
    x_hat = np.asarray(x_hat)
    if x_hat.ndim not in (2, 3):
        raise InvalidInputError(f"expected (H, W) or (H, W, D) array, got shape {x_hat.shape}")
    return np.real(scipy.fft.ifft2(x_hat, axes=(0, 1)))


def _check_pair(a_hat: np.ndarray, b_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a_hat = np.asarray(a_hat)
    b_hat = np.asarray(b_hat)
    if a_hat.shape != b_hat.shape:
        raise InvalidInputError(f"spectra shapes differ: {a_hat.shape} vs {b_hat.shape}")
    if a_hat.ndim == 2:
        a_hat = a_hat[:, :, np.newaxis]
        b_hat = b_hat[:, :, np.newaxis]
    elif a_hat.ndim != 3:
        raise InvalidInputError(f"expected (H, W) or (H, W, D) spectra, got shape {a_hat.shape}")
    return a_hat, b_hat


def linear_kernel_corr(a_hat: np.ndarray, b_hat: np.ndarray) -> np.ndarray:
    """Channel-summed cross-spectrum conj(a) * b, shape (H, W).

    The spatial transform of the result is the circular cross-correlation
    sum_d sum_n a_d[n] * b_d[n + k]; it peaks at the cyclic shift of ``b``
    relative to ``a``.
    """
    a_hat, b_hat = _check_pair(a_hat, b_hat)
    return np.sum(np.conj(a_hat) * b_hat, axis=2)


def gaussian_kernel_corr(a_hat: np.ndarray, b_hat: np.ndarray, sigma: float) -> np.ndarray:
    """Spectrum of the Gaussian kernel vector between all cyclic shifts of b and a.

    The spatial vector is exp(-(||a||^2 + ||b||^2 - 2*cc) / (sigma^2 * W*H*D))
    with cc the channel-summed circular cross-correlation; the size
    normalization keeps the bandwidth comparable across grid and channel
    counts.  Spatial values lie in (0, 1].
    """
    if sigma <= 0:
        raise InvalidInputError(f"sigma must be positive, got {sigma}")
    a_hat, b_hat = _check_pair(a_hat, b_hat)
    h, w, d = a_hat.shape
    n = h * w
    # Parseval: spatial energy from the unnormalized spectra.
    energy_a = float(np.sum(np.abs(a_hat) ** 2)) / n
    energy_b = float(np.sum(np.abs(b_hat) ** 2)) / n
    cc = idft2(np.sum(np.conj(a_hat) * b_hat, axis=2))
    dist = (energy_a + energy_b - 2.0 * cc) / (sigma * sigma * n * d)
    np.clip(dist, 0.0, None, out=dist)  # float noise can push tiny distances negative
    kernel = np.exp(-dist)
    if not np.all(np.isfinite(kernel)):
        raise NumericalError("gaussian kernel vector contains non-finite values")
    return dft2(kernel)
