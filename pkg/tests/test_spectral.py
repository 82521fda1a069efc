import numpy as np
import pytest

from margintrack.errors import InvalidInputError
from margintrack.oracles import roll2
from margintrack.spectral import (dft2, gaussian_kernel_corr, idft2,
                                  linear_kernel_corr)


def test_round_trip_is_identity():
    rng = np.random.default_rng(0)
    for shape in ((5, 7), (4, 4, 3), (1, 6, 2), (3, 1)):
        x = rng.standard_normal(shape)
        assert np.allclose(idft2(dft2(x)), x, atol=1e-12)


def test_dft2_is_linear():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((6, 5, 2))
    b = rng.standard_normal((6, 5, 2))
    assert np.allclose(dft2(2.0 * a - 3.0 * b), 2.0 * dft2(a) - 3.0 * dft2(b))


def test_real_input_spectrum_is_conjugate_symmetric():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((6, 8))
    x_hat = dft2(x)
    h, w = x.shape
    for ky in range(h):
        for kx in range(w):
            mirror = x_hat[(-ky) % h, (-kx) % w]
            assert abs(x_hat[ky, kx] - np.conj(mirror)) < 1e-10


def test_dft2_rejects_bad_shapes():
    with pytest.raises(InvalidInputError):
        dft2(np.zeros(5))
    with pytest.raises(InvalidInputError):
        dft2(np.zeros((2, 3, 4, 5)))
    with pytest.raises(InvalidInputError):
        idft2(np.zeros(5))


def test_linear_kernel_corr_matches_brute_force():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 5, 3))
    b = rng.standard_normal((4, 5, 3))
    fast = idft2(linear_kernel_corr(dft2(a), dft2(b)))
    for dy in range(4):
        for dx in range(5):
            brute = float(np.sum(a * roll2(b, -dy, -dx)))
            assert abs(fast[dy, dx] - brute) < 1e-9


def test_linear_kernel_corr_peaks_at_the_shift():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((6, 7, 2))
    b = roll2(a, 2, 3)
    corr = idft2(linear_kernel_corr(dft2(a), dft2(b)))
    assert np.unravel_index(np.argmax(corr), corr.shape) == (2, 3)


def test_linear_kernel_corr_accepts_2d_spectra():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((4, 4))
    out = linear_kernel_corr(dft2(a), dft2(a))
    assert out.shape == (4, 4)


def test_kernel_corr_shape_mismatch_raises():
    with pytest.raises(InvalidInputError):
        linear_kernel_corr(np.zeros((3, 3, 1), complex), np.zeros((3, 4, 1), complex))
    with pytest.raises(InvalidInputError):
        gaussian_kernel_corr(np.zeros((3, 3), complex), np.zeros((4, 3), complex), 0.5)


def test_gaussian_kernel_corr_matches_brute_force():
    rng = np.random.default_rng(6)
    a = rng.standard_normal((3, 4, 2))
    b = rng.standard_normal((3, 4, 2))
    sigma = 0.5
    n, d = 12, 2
    fast = idft2(gaussian_kernel_corr(dft2(a), dft2(b), sigma))
    for dy in range(3):
        for dx in range(4):
            dist = float(np.sum((a - roll2(b, -dy, -dx)) ** 2))
            brute = np.exp(-dist / (sigma * sigma * n * d))
            assert abs(fast[dy, dx] - brute) < 1e-9


def test_gaussian_kernel_values_in_unit_interval():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((5, 5, 3))
    k = idft2(gaussian_kernel_corr(dft2(a), dft2(a), 0.5))
    assert np.all(k <= 1.0 + 1e-12)
    assert np.all(k > 0.0)
    assert abs(k[0, 0] - 1.0) < 1e-12  # self-shift distance is zero


def test_gaussian_kernel_corr_rejects_bad_sigma():
    x = dft2(np.ones((3, 3)))
    with pytest.raises(InvalidInputError):
        gaussian_kernel_corr(x, x, 0.0)
    with pytest.raises(InvalidInputError):
        gaussian_kernel_corr(x, x, -1.0)
