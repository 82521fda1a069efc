import numpy as np
import pytest

from margintrack.dataset import synthesize_sequence
from margintrack.errors import InvalidInputError
from margintrack.tracker import FrameResult, Tracker, TrackerConfig


def _centers(boxes):
    boxes = np.asarray(boxes)
    return boxes[:, :2] + boxes[:, 2:] / 2.0


def test_config_round_trips_through_dict():
    cfg = TrackerConfig(padding=2.0, mode="kernel-gaussian", multimodal=False)
    assert TrackerConfig.from_dict(cfg.to_dict()) == cfg


def test_config_rejects_unknown_keys_and_bad_values():
    with pytest.raises(InvalidInputError):
        TrackerConfig.from_dict({"paddding": 1.5})
    with pytest.raises(InvalidInputError):
        TrackerConfig(mode="dense")
    with pytest.raises(InvalidInputError):
        TrackerConfig(eta=0.0)
    with pytest.raises(InvalidInputError):
        TrackerConfig(theta=1.0001)
    with pytest.raises(InvalidInputError):
        TrackerConfig(scale_factor=1.0)
    with pytest.raises(InvalidInputError):
        TrackerConfig(padding=-1.0)


def test_config_file_parsing(tmp_path):
    path = tmp_path / "tracker.conf"
    path.write_text(
        "# operating point for the office camera\n"
        "padding = 2.0\n"
        "mode = kernel-gaussian   # heavier but smoother\n"
        "multimodal = no\n"
        "update_iterations = 5\n"
        "\n")
    cfg = TrackerConfig.from_file(path)
    assert cfg.padding == 2.0
    assert cfg.mode == "kernel-gaussian"
    assert cfg.multimodal is False
    assert cfg.update_iterations == 5
    overridden = TrackerConfig.from_file(path, overrides={"padding": 1.5})
    assert overridden.padding == 1.5


def test_config_file_errors_carry_line_numbers(tmp_path):
    missing_eq = tmp_path / "a.conf"
    missing_eq.write_text("padding = 1.5\npadding 2.0\n")
    with pytest.raises(InvalidInputError, match=":2:"):
        TrackerConfig.from_file(missing_eq)
    bad_value = tmp_path / "b.conf"
    bad_value.write_text("padding = wide\n")
    with pytest.raises(InvalidInputError, match=":1:"):
        TrackerConfig.from_file(bad_value)
    unknown = tmp_path / "c.conf"
    unknown.write_text("pading = 1.5\n")
    with pytest.raises(InvalidInputError, match="unknown config key"):
        TrackerConfig.from_file(unknown)


def test_init_fits_and_reports_frame_zero():
    seq = synthesize_sequence("translate", seed=0, num_frames=3)
    tracker = Tracker()
    res = tracker.init(seq.frame(0), seq.init_box)
    assert isinstance(res, FrameResult)
    assert res.frame_index == 0
    assert res.updated is True
    assert res.scale == 1.0
    assert res.box == pytest.approx(tuple(seq.init_box), abs=1e-6)
    assert tracker.model.grid[0] <= 64 and tracker.model.grid[1] <= 64


def test_step_before_init_raises():
    with pytest.raises(InvalidInputError):
        Tracker().step(np.zeros((40, 40), np.uint8))


def test_init_box_validation():
    frame = np.zeros((60, 80), np.uint8)
    with pytest.raises(InvalidInputError):
        Tracker().init(frame, (10.0, 10.0, 0.0, 5.0))
    with pytest.raises(InvalidInputError):
        Tracker().init(frame, (200.0, 200.0, 10.0, 10.0))


def test_frame_shape_must_stay_fixed():
    seq = synthesize_sequence("translate", seed=0, num_frames=2)
    tracker = Tracker()
    tracker.init(seq.frame(0), seq.init_box)
    with pytest.raises(InvalidInputError):
        tracker.step(np.zeros((10, 10), np.uint8))
    with pytest.raises(InvalidInputError):
        tracker.step(np.zeros((240, 320, 4), np.uint8))


def test_single_channel_axis_is_squeezed():
    seq = synthesize_sequence("translate", seed=0, num_frames=2)
    first = seq.frame(0)
    frame3d = first[:, :, None] if first.ndim == 2 else first
    tracker = Tracker()
    tracker.init(frame3d[:, :, :1] if first.ndim == 2 else first, seq.init_box)
    res = tracker.step(seq.frame(1))
    assert not res.failed


def test_tracks_a_short_translation():
    seq = synthesize_sequence("translate", seed=0, num_frames=10)
    tracker = Tracker()
    tracker.init(seq.frame(0), seq.init_box)
    boxes = [seq.init_box]
    for i in range(1, seq.n_frames):
        res = tracker.step(seq.frame(i))
        boxes.append(res.box)
        assert res.frame_index == i
        assert res.f_max > 0.0
    err = np.linalg.norm(_centers(boxes) - _centers(seq.ground_truth[:10]),
                         axis=1)
    assert err.mean() < 3.0


def test_static_frame_keeps_the_center():
    seq = synthesize_sequence("translate", seed=0, num_frames=1)
    frame = seq.frame(0)
    tracker = Tracker()
    tracker.init(frame, seq.init_box)
    before = tracker.center
    res = tracker.step(frame)
    assert res.box[0] == pytest.approx(seq.init_box[0], abs=1.0)
    assert tracker.center == pytest.approx(before, abs=1.0)
    assert res.updated


def test_always_update_overrides_the_gate():
    seq = synthesize_sequence("occlude", seed=0, num_frames=45)
    tracker = Tracker(TrackerConfig(always_update=True))
    tracker.init(seq.frame(0), seq.init_box)
    assert all(tracker.step(seq.frame(i)).updated
               for i in range(1, seq.n_frames))


def test_huge_target_respects_grid_cap():
    rng = np.random.default_rng(0)
    frame = rng.integers(0, 256, (800, 800)).astype(np.uint8)
    tracker = Tracker()
    tracker.init(frame, (50.0, 50.0, 500.0, 500.0))
    gh, gw = tracker.model.grid
    assert gh <= 64 and gw <= 64
    assert gh >= 4 and gw >= 4
