"""Brute-force reference implementations over explicit shifted-sample sets.

Everything here materializes the full circulant structure (every cyclic
shift as its own training sample) and solves with dense linear algebra.
O(n^2)-and-worse on purpose: small, obviously correct, and used to verify
the Fourier-domain fast paths on small random instances.
"""

from __future__ import annotations

import numpy as np


def roll2(x: np.ndarray, dy: int, dx: int) -> np.ndarray:
    return np.roll(np.roll(x, dy, axis=0), dx, axis=1)


def _as3d(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x[:, :, None] if x.ndim == 2 else x


def shifted_samples(x: np.ndarray) -> np.ndarray:
    """(N, M) matrix whose row dy*W+dx is vec(x cyclically shifted by dy, dx)."""
    x = _as3d(x)
    h, w, _ = x.shape
    rows = [roll2(x, dy, dx).ravel() for dy in range(h) for dx in range(w)]
    return np.asarray(rows)


def linear_kernel_value(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(np.asarray(a, dtype=np.float64) * np.asarray(b, dtype=np.float64)))


def gaussian_kernel_value(a: np.ndarray, b: np.ndarray, sigma: float) -> float:
    a = _as3d(a)
    b = _as3d(b)
    h, w, d = a.shape
    dist = np.sum(a * a) + np.sum(b * b) - 2.0 * np.sum(a * b)
    dist = max(dist, 0.0) / (sigma * sigma * h * w * d)
    return float(np.exp(-dist))


def _kernel_value(a, b, kernel: str, sigma: float) -> float:
    if kernel == "linear":
        return linear_kernel_value(a, b)
    if kernel == "gaussian":
        return gaussian_kernel_value(a, b, sigma)
    raise ValueError(f"unknown kernel {kernel!r}")


def dense_linear_model(x: np.ndarray, u: np.ndarray, C: float) -> np.ndarray:
    """Ridge fit of w to all shifted samples: argmin 0.5|w|^2 + C|Xw - u|^2."""
    x = _as3d(x)
    X = shifted_samples(x)
    m = X.shape[1]
    lhs = X.T @ X + np.eye(m) / (2.0 * C)
    w = np.linalg.solve(lhs, X.T @ np.asarray(u, dtype=np.float64).ravel())
    return w.reshape(x.shape)


def dense_kernel_matrix(x: np.ndarray, kernel: str = "linear",
                        sigma: float = 0.5) -> np.ndarray:
    x = _as3d(x)
    h, w, _ = x.shape
    shifts = [roll2(x, dy, dx) for dy in range(h) for dx in range(w)]
    n = len(shifts)
    K = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            K[i, j] = K[j, i] = _kernel_value(shifts[i], shifts[j], kernel, sigma)
    return K


def dense_kernel_alpha(x: np.ndarray, u: np.ndarray, C: float,
                       kernel: str = "linear", sigma: float = 0.5) -> np.ndarray:
    """Dual ridge coefficients: (K + I/(2C))^-1 u, reshaped to the grid."""
    x = _as3d(x)
    K = dense_kernel_matrix(x, kernel, sigma)
    alpha = np.linalg.solve(K + np.eye(len(K)) / (2.0 * C),
                            np.asarray(u, dtype=np.float64).ravel())
    return alpha.reshape(x.shape[:2])


def dense_training_response_linear(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """r[dy, dx] = <w, x shifted by (dy, dx)>."""
    x = _as3d(x)
    h, wd, _ = x.shape
    return (shifted_samples(x) @ _as3d(w).ravel()).reshape(h, wd)


def dense_training_response_kernel(x: np.ndarray, alpha: np.ndarray,
                                   kernel: str = "linear",
                                   sigma: float = 0.5) -> np.ndarray:
    x = _as3d(x)
    K = dense_kernel_matrix(x, kernel, sigma)
    r = K @ np.asarray(alpha, dtype=np.float64).ravel()
    return r.reshape(x.shape[:2])


def dense_detection_linear(w: np.ndarray, s: np.ndarray) -> np.ndarray:
    """R[dy, dx] = <w, s shifted by (-dy, -dx)>: high where the content of s
    sits (dy, dx) ahead of where the model expects it."""
    w = _as3d(w)
    s = _as3d(s)
    h, wd, _ = s.shape
    out = np.empty((h, wd))
    for dy in range(h):
        for dx in range(wd):
            out[dy, dx] = np.sum(w * roll2(s, -dy, -dx))
    return out


def dense_detection_kernel(x: np.ndarray, alpha: np.ndarray, s: np.ndarray,
                           kernel: str = "linear",
                           sigma: float = 0.5) -> np.ndarray:
    """R[k] = sum_j alpha[j] * kappa(x, s shifted by (j - k))."""
    x = _as3d(x)
    s = _as3d(s)
    h, w, _ = s.shape
    kappa = np.empty((h, w))
    for dy in range(h):
        for dx in range(w):
            kappa[dy, dx] = _kernel_value(x, roll2(s, dy, dx), kernel, sigma)
    a = np.asarray(alpha, dtype=np.float64)
    out = np.empty((h, w))
    for ky in range(h):
        for kx in range(w):
            total = 0.0
            for jy in range(h):
                for jx in range(w):
                    total += a[jy, jx] * kappa[(jy - ky) % h, (jx - kx) % w]
            out[ky, kx] = total
    return out


def dense_objective(x: np.ndarray, u: np.ndarray, C: float, mode: str,
                    w: np.ndarray | None = None,
                    alpha: np.ndarray | None = None,
                    sigma: float = 0.5) -> float:
    """0.5 |model|^2 + C * sum of squared residuals against targets u."""
    x = _as3d(x)
    u = np.asarray(u, dtype=np.float64).ravel()
    if mode == "linear":
        r = dense_training_response_linear(x, w).ravel()
        norm_sq = float(np.sum(_as3d(w) ** 2))
    else:
        kernel = "linear" if mode == "kernel-linear" else "gaussian"
        K = dense_kernel_matrix(x, kernel, sigma)
        a = np.asarray(alpha, dtype=np.float64).ravel()
        r = K @ a
        norm_sq = float(a @ K @ a)
    return 0.5 * norm_sq + C * float(np.sum((r - u) ** 2))
