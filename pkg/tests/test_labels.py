import numpy as np
import pytest

from margintrack.errors import InvalidInputError
from margintrack.labels import build_labels


def test_peak_is_exactly_one_at_zero_shift():
    labels = build_labels(8, 6, (3.0, 2.0))
    assert labels.score[0, 0] == 1.0
    assert labels.loss_root[0, 0] == 0.0
    assert labels.score.shape == (6, 8)


def test_sigma_scales_with_target_cell_area():
    labels = build_labels(10, 10, (4.0, 9.0), sigma_factor=0.1)
    assert labels.sigma == pytest.approx(0.1 * 6.0)


def test_score_has_wrapped_symmetry():
    labels = build_labels(7, 5, (2.0, 2.0))
    s = labels.score
    h, w = s.shape
    for dy in range(h):
        for dx in range(w):
            assert s[dy, dx] == pytest.approx(s[(-dy) % h, (-dx) % w], abs=1e-15)


def test_score_decays_with_wrapped_distance():
    labels = build_labels(9, 9, (2.0, 2.0))
    row = labels.score[0]
    # 0..4 moves away from the peak, 5..8 wraps back toward it
    assert np.all(np.diff(row[:5]) < 0)
    assert np.all(np.diff(row[5:]) > 0)


def test_value_ranges():
    labels = build_labels(12, 7, (5.0, 3.0))
    assert np.all(labels.score > 0.0) and np.all(labels.score <= 1.0)
    assert np.all(labels.loss_root >= 0.0) and np.all(labels.loss_root <= 1.0)
    assert np.allclose(labels.loss_root ** 2, 1.0 - labels.score)


def test_degenerate_single_cell_grid():
    labels = build_labels(1, 1, (1.0, 1.0))
    assert labels.score.shape == (1, 1)
    assert labels.score[0, 0] == 1.0


def test_invalid_arguments_raise():
    with pytest.raises(InvalidInputError):
        build_labels(0, 4, (2.0, 2.0))
    with pytest.raises(InvalidInputError):
        build_labels(4, 4, (0.0, 2.0))
    with pytest.raises(InvalidInputError):
        build_labels(4, 4, (2.0, 2.0), sigma_factor=0.0)
