import numpy as np
import pytest

from margintrack import oracles
from margintrack.detector import (PatchGeometry, ResponseMap, find_peaks,
                                  multimodal_detect, respond, wrapped_shift)
from margintrack.errors import InvalidInputError, NumericalError
from margintrack.features import apply_window, extract_features, window2d
from margintrack.labels import build_labels
from margintrack.optimizer import train
from margintrack.spectral import idft2


def _trained(seed=0, grid=(8, 8), mode="linear"):
    rng = np.random.default_rng(seed)
    feats = rng.standard_normal((grid[0], grid[1], 3))
    labels = build_labels(grid[1], grid[0], (grid[1] / 2.5, grid[0] / 2.5))
    model, _ = train(feats, labels, C=100.0, iterations=3, mode=mode)
    return model, feats


@pytest.mark.parametrize("mode", ["linear", "kernel-linear", "kernel-gaussian"])
def test_response_peaks_at_the_cyclic_shift(mode):
    model, feats = _trained(mode=mode)
    for dy, dx in ((0, 0), (2, 3), (7, 1), (5, 5)):
        shifted = np.roll(feats, (dy, dx), axis=(0, 1))
        assert respond(model, shifted).peak_pos == (dx, dy)


def test_response_matches_dense_scoring():
    model, feats = _trained(seed=1, grid=(4, 5))
    rng = np.random.default_rng(2)
    s = rng.standard_normal(feats.shape)
    fast = respond(model, s).values
    dense = oracles.dense_detection_linear(idft2(model.w_hat), s)
    assert np.abs(fast - dense).max() < 1e-9


def test_response_map_extrema_fields():
    model, feats = _trained(seed=3)
    r = respond(model, feats)
    assert r.f_max == pytest.approx(r.values.max())
    assert r.f_min == pytest.approx(r.values.min())
    px, py = r.peak_pos
    assert r.values[py, px] == r.f_max


def test_respond_rejects_mismatched_candidates():
    model, feats = _trained(seed=4)
    with pytest.raises(InvalidInputError):
        respond(model, feats[:4])
    with pytest.raises(InvalidInputError):
        respond(model, feats[:, :, :2])
    with np.errstate(invalid="ignore"), pytest.raises(NumericalError):
        respond(model, np.full_like(feats, np.inf))


def test_find_peaks_orders_and_filters():
    v = np.zeros((20, 20))
    v[5, 5] = 1.0    # global max
    v[15, 15] = 0.8  # strong secondary
    v[2, 10] = 0.1   # below theta
    peaks = find_peaks(v, theta=0.7)
    assert peaks.positions == [(5, 5), (15, 15)]
    assert peaks.values == [1.0, 0.8]


def test_find_peaks_suppresses_near_duplicates():
    v = np.zeros((20, 20))
    v[5, 5] = 1.0
    v[6, 6] = 0.9   # within the suppression radius of the global max
    v[0, 0] = 0.85  # wraps to within radius of nothing retained yet
    peaks = find_peaks(v, theta=0.5)
    assert (6, 6) not in peaks.positions
    assert (0, 0) in peaks.positions


def test_find_peaks_wrapped_suppression():
    v = np.zeros((20, 20))
    v[0, 0] = 1.0
    v[19, 19] = 0.9  # wrapped distance sqrt(2) from the global max
    peaks = find_peaks(v, theta=0.5)
    assert peaks.positions == [(0, 0)]


def test_find_peaks_caps_secondary_count():
    v = np.zeros((40, 40))
    v[2, 2] = 1.0
    spots = [(10, 10), (10, 30), (30, 10), (30, 30), (20, 20), (2, 20), (20, 2)]
    for i, (y, x) in enumerate(spots):
        v[y, x] = 0.95 - 0.01 * i
    peaks = find_peaks(v, theta=0.5)
    assert len(peaks.positions) == 6  # global + max_secondary
    assert peaks.positions[0] == (2, 2)
    assert peaks.values == sorted(peaks.values, reverse=True)


def test_find_peaks_constant_map_keeps_only_global():
    peaks = find_peaks(np.ones((8, 8)), theta=0.5)
    assert len(peaks.positions) == 1


def test_find_peaks_negative_top_keeps_only_global():
    v = np.full((12, 12), -2.0)
    v[3, 3] = -0.5
    v[9, 9] = -0.6
    peaks = find_peaks(v, theta=0.3)
    assert peaks.positions == [(3, 3)]


def test_find_peaks_validates_theta():
    with pytest.raises(InvalidInputError):
        find_peaks(np.zeros((4, 4)), theta=1.5)


def test_wrapped_shift_decodes_signed_displacement():
    assert wrapped_shift((0, 0), (10, 10)) == (0, 0)
    assert wrapped_shift((5, 6), (10, 10)) == (5, -4)
    assert wrapped_shift((5, 4), (9, 9)) == (-4, 4)
    assert wrapped_shift((9, 1), (10, 10)) == (-1, 1)


def _scene(offset=(0, 0)):
    """A textured target on a flat frame plus matching model/geometry."""
    rng = np.random.default_rng(11)
    frame = np.full((120, 120), 100, np.uint8)
    tex = rng.integers(0, 256, (20, 20)).astype(np.uint8)
    frame[20:40, 20:40] = tex
    center = (30.0, 30.0)
    geom = PatchGeometry(base_size=(20.0, 20.0), padding=1.0,
                         template_size=(40, 40), cell_size=4,
                         template_scale=(1.0, 1.0))
    window = window2d(10, 10)
    feats = apply_window(extract_features(
        frame[10:50, 10:50], 4), window)
    labels = build_labels(10, 10, (5.0, 5.0))
    model, _ = train(feats, labels, C=10000.0, iterations=10)
    query = (center[0] + offset[0], center[1] + offset[1])
    return model, frame, query, geom, window


def test_detection_recenters_on_the_target():
    model, frame, query, geom, window = _scene(offset=(4, 8))
    det = multimodal_detect(model, frame, query, geom, 1.0, window, 0.7)
    assert det.center[0] == pytest.approx(30.0, abs=2.0)
    assert det.center[1] == pytest.approx(30.0, abs=2.0)
    assert not det.failed
    assert det.peaks_considered >= 1
    assert det.f_max >= det.primary_f_max


def test_unimodal_uses_single_peak():
    model, frame, query, geom, window = _scene(offset=(0, 0))
    det = multimodal_detect(model, frame, query, geom, 1.0, window, 0.7,
                            multimodal=False)
    assert det.peaks_considered == 1
    assert det.f_max == det.primary_f_max


def test_detection_fails_when_search_leaves_the_frame():
    model, frame, _, geom, window = _scene()
    det = multimodal_detect(model, frame, (900.0, 900.0), geom, 1.0,
                            window, 0.7)
    assert det.failed
    assert det.center == (900.0, 900.0)
    assert det.f_max == 0.0


def test_cells_to_px_scales_with_the_patch():
    geom = PatchGeometry(base_size=(30.0, 20.0), padding=1.5,
                         template_size=(60, 40), cell_size=4,
                         template_scale=(1.25, 1.25))
    assert geom.cells_to_px(1.0) == (5.0, 5.0)
    assert geom.cells_to_px(2.0) == (10.0, 10.0)
