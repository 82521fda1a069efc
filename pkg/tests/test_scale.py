import cv2
import numpy as np
import pytest

from margintrack.errors import InvalidInputError
from margintrack.scale import (estimate_scale, make_scale_model,
                               scale_features, train_scale)


def _frame_with_target(side, canvas=(240, 320), seed=3):
    rng = np.random.default_rng(seed)
    frame = np.full(canvas, 80, np.uint8)
    tex = rng.integers(0, 256, (64, 64)).astype(np.uint8)
    patch = cv2.resize(tex, (side, side), interpolation=cv2.INTER_LINEAR)
    cy, cx = canvas[0] // 2, canvas[1] // 2
    y0, x0 = cy - side // 2, cx - side // 2
    frame[y0:y0 + side, x0:x0 + side] = patch
    return frame, (float(cx), float(cy))


def test_ladder_is_geometric_and_centered():
    model = make_scale_model((40.0, 30.0))
    assert model.num_scales == 33
    assert model.factors[16] == 1.0
    ratios = model.factors[1:] / model.factors[:-1]
    assert np.allclose(ratios, 1.02)
    assert not model.trained


def test_template_keeps_aspect_with_floor():
    assert make_scale_model((64.0, 32.0)).template_size == (32, 16)
    assert make_scale_model((32.0, 64.0)).template_size == (16, 32)
    assert make_scale_model((100.0, 10.0)).template_size == (32, 16)  # floored


def test_make_scale_model_validation():
    with pytest.raises(InvalidInputError):
        make_scale_model((20.0, 20.0), num_scales=0)
    with pytest.raises(InvalidInputError):
        make_scale_model((20.0, 20.0), factor=1.0)
    with pytest.raises(InvalidInputError):
        make_scale_model((0.0, 20.0))


def test_untrained_model_reports_current_scale():
    frame, center = _frame_with_target(48)
    model = make_scale_model((48.0, 48.0))
    assert estimate_scale(model, frame, center, 1.3) == 1.3


def test_single_level_ladder_never_changes_scale():
    frame, center = _frame_with_target(48)
    model = make_scale_model((48.0, 48.0), num_scales=1)
    model = train_scale(model, frame, center, 1.0, eta=1.0)
    assert estimate_scale(model, frame, center, 0.9) == 0.9


def test_same_frame_estimates_the_trained_scale():
    frame, center = _frame_with_target(48)
    model = train_scale(make_scale_model((48.0, 48.0)), frame, center, 1.0,
                        eta=1.0)
    assert estimate_scale(model, frame, center, 1.0) == pytest.approx(1.0)


def test_grown_target_raises_the_estimate():
    small, center = _frame_with_target(48)
    grown, _ = _frame_with_target(int(round(48 * 1.02 ** 4)))
    model = train_scale(make_scale_model((48.0, 48.0)), small, center, 1.0,
                        eta=1.0)
    est = estimate_scale(model, grown, center, 1.0)
    assert est > 1.02
    assert est == pytest.approx(1.02 ** 4, rel=0.05)
    shrunk, _ = _frame_with_target(int(round(48 / 1.02 ** 4)))
    assert estimate_scale(model, shrunk, center, 1.0) < 1.0 / 1.02


def test_feature_matrix_shape_and_windowing():
    frame, center = _frame_with_target(48)
    model = make_scale_model((48.0, 48.0), num_scales=9)
    feats = scale_features(model, frame, center, 1.0)
    assert feats.shape[1] == 9
    # Hann taper zeroes the outermost ladder levels
    assert np.allclose(feats[:, 0], 0.0) and np.allclose(feats[:, 8], 0.0)
    assert np.any(feats[:, 4] != 0.0)


def test_degenerate_levels_are_zero_filled():
    frame, center = _frame_with_target(48)
    model = make_scale_model((2.0, 2.0), num_scales=33)
    feats = scale_features(model, frame, center, 0.7)
    assert feats.shape[1] == 33
    assert np.allclose(feats[:, 0], 0.0)      # crop would be under 2 px
    assert np.any(feats[:, 20] != 0.0)
    with pytest.raises(InvalidInputError):
        scale_features(make_scale_model((1.0, 1.0)), frame, center, 0.5)


def test_training_blends_statistics_linearly():
    frame_a, center = _frame_with_target(48, seed=3)
    frame_b, _ = _frame_with_target(48, seed=4)
    base = make_scale_model((48.0, 48.0), num_scales=9)
    first = train_scale(base, frame_a, center, 1.0, eta=1.0)
    only_b = train_scale(base, frame_b, center, 1.0, eta=1.0)
    blended = train_scale(first, frame_b, center, 1.0, eta=0.3)
    assert np.allclose(blended.num_hat,
                       0.7 * first.num_hat + 0.3 * only_b.num_hat)
    assert np.allclose(blended.den, 0.7 * first.den + 0.3 * only_b.den)
    with pytest.raises(InvalidInputError):
        train_scale(base, frame_a, center, 1.0, eta=0.0)


def test_precomputed_pyramid_matches_fresh_extraction():
    frame, center = _frame_with_target(48)
    model = make_scale_model((48.0, 48.0), num_scales=9)
    pyramid = scale_features(model, frame, center, 1.0)
    via_param = train_scale(model, frame, center, 1.0, eta=1.0,
                            features=pyramid)
    fresh = train_scale(model, frame, center, 1.0, eta=1.0)
    assert np.array_equal(via_param.num_hat, fresh.num_hat)
    assert np.array_equal(via_param.den, fresh.den)
