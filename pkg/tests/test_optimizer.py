import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from margintrack import oracles
from margintrack.errors import InvalidInputError, NumericalError
from margintrack.labels import build_labels
from margintrack.optimizer import (MODES, SlackState, init_slack,
                                   interpolate_model, model_norm_sq,
                                   model_step_kernel, model_step_linear,
                                   objective, train, training_response,
                                   z_step)
from margintrack.spectral import idft2


def _instance(seed, h=4, w=5, d=2):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((h, w, d))
    u = rng.standard_normal((h, w))
    return x, u


def _state_for(u):
    return SlackState(z=np.zeros_like(u), u0_height=float(u.max()), u=u)


def test_linear_step_matches_dense_ridge():
    for seed in range(5):
        x, u = _instance(seed)
        model = model_step_linear(x, _state_for(u), C=7.0)
        dense = oracles.dense_linear_model(x, u, C=7.0)
        assert np.abs(idft2(model.w_hat) - dense).max() < 1e-8


def test_kernel_alpha_matches_dense_solve():
    for kernel in ("linear", "gaussian"):
        for seed in range(3):
            x, u = _instance(seed + 10)
            model = model_step_kernel(x, _state_for(u), C=3.0,
                                      kernel=kernel, sigma_k=0.5)
            dense = oracles.dense_kernel_alpha(x, u, C=3.0,
                                               kernel=kernel, sigma=0.5)
            assert np.abs(idft2(model.alpha_hat) - dense).max() < 1e-8


def test_training_response_scores_every_shift():
    x, u = _instance(42, h=3, w=4, d=2)
    model = model_step_linear(x, _state_for(u), C=5.0)
    w_spatial = idft2(model.w_hat)
    r = training_response(model)
    for dy in range(3):
        for dx in range(4):
            shifted = np.roll(np.roll(x, dy, axis=0), dx, axis=1)
            assert abs(r[dy, dx] - np.sum(w_spatial * shifted)) < 1e-9


def test_init_slack_targets_ideal_scores():
    labels = build_labels(6, 5, (3.0, 3.0))
    state = init_slack(labels)
    assert np.all(state.z == 0.0)
    assert state.u0_height == 1.0
    assert np.allclose(state.u, 1.0 - labels.loss_root)


def test_z_step_invariants():
    labels = build_labels(5, 4, (2.5, 2.0))
    for seed in range(4):
        x, _ = _instance(seed, h=4, w=5, d=1)
        model = model_step_linear(x, init_slack(labels), C=50.0)
        state = z_step(model, labels)
        r = training_response(model)
        assert state.u0_height == pytest.approx(r.max())
        assert np.all(state.z >= 0.0)
        # slack + target reconstruct the lowered plane exactly
        assert np.allclose(state.u + state.z,
                           state.u0_height - labels.loss_root)
        # active slack pins the target to the response; inactive slack
        # means the response already clears the margin
        active = state.z > 0
        assert np.allclose(state.u[active], r[active])
        assert np.all(r[~active] >= state.u[~active] - 1e-12)


def test_z_step_with_fresh_features():
    labels = build_labels(5, 4, (2.5, 2.0))
    x, _ = _instance(1, h=4, w=5, d=2)
    s, _ = _instance(2, h=4, w=5, d=2)
    model = model_step_linear(x, init_slack(labels), C=10.0)
    w_spatial = idft2(model.w_hat)
    state = z_step(model, labels, features=s)
    r = oracles.dense_detection_linear(w_spatial, s)
    assert state.u0_height == pytest.approx(r.max())
    assert np.allclose(state.u + state.z, r.max() - labels.loss_root)


@given(st.integers(0, 10_000))
def test_model_step_lowers_frozen_objective(seed):
    rng = np.random.default_rng(seed)
    h, w = int(rng.integers(3, 7)), int(rng.integers(3, 7))
    d = int(rng.integers(1, 3))
    x = rng.standard_normal((h, w, d))
    labels = build_labels(w, h, (w / 2.5, h / 2.5))
    mode = MODES[int(rng.integers(3))]
    C = 100.0
    state = init_slack(labels)
    if mode == "linear":
        model = model_step_linear(x, state, C)
    else:
        kernel = "linear" if mode == "kernel-linear" else "gaussian"
        model = model_step_kernel(x, state, C, kernel=kernel, sigma_k=0.5)
    baseline = C * float(np.sum(state.u ** 2))  # objective of the zero model
    assert objective(model, labels, state) <= baseline + 1e-9

    # second sweep: re-anchor targets, refit, objective must not rise
    state2 = z_step(model, labels)
    before = objective(model, labels, state2)
    if mode == "linear":
        model2 = model_step_linear(x, state2, C)
    else:
        model2 = model_step_kernel(x, state2, C, kernel=kernel, sigma_k=0.5)
    assert objective(model2, labels, state2) <= before + 1e-9


def test_model_norm_matches_spatial_norm():
    x, u = _instance(3)
    model = model_step_linear(x, _state_for(u), C=4.0)
    w_spatial = idft2(model.w_hat)
    assert model_norm_sq(model) == pytest.approx(np.sum(w_spatial ** 2))


def test_kernel_model_norm_is_alpha_K_alpha():
    x, u = _instance(4, h=3, w=3, d=2)
    model = model_step_kernel(x, _state_for(u), C=4.0, kernel="gaussian",
                              sigma_k=0.5)
    alpha = idft2(model.alpha_hat).ravel()
    K = oracles.dense_kernel_matrix(x, "gaussian", 0.5)
    assert model_norm_sq(model) == pytest.approx(alpha @ K @ alpha)


def test_train_peaks_at_the_labeled_target():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((8, 8, 2))
    labels = build_labels(8, 8, (4.0, 4.0))
    for mode in MODES:
        model, state = train(x, labels, C=100.0, iterations=4, mode=mode)
        r = training_response(model)
        assert np.unravel_index(np.argmax(r), r.shape) == (0, 0)
        assert state.u0_height == pytest.approx(r.max())


def test_degenerate_kernel_denominator_raises():
    labels = build_labels(4, 4, (2.0, 2.0))
    zero = np.zeros((4, 4, 1))
    with pytest.raises(NumericalError):
        model_step_kernel(zero, init_slack(labels), C=1e12, kernel="linear")


def test_step_validation_errors():
    x, u = _instance(6)
    state = _state_for(u)
    with pytest.raises(InvalidInputError):
        model_step_linear(x, state, C=0.0)
    with pytest.raises(InvalidInputError):
        model_step_kernel(x, state, C=1.0, kernel="cubic")
    with pytest.raises(InvalidInputError):
        model_step_linear(x, _state_for(u[:2]), C=1.0)
    with pytest.raises(InvalidInputError):
        model_step_linear(x[0], state, C=1.0)  # 2-D features


def test_train_validation_errors():
    x, _ = _instance(7)
    labels = build_labels(5, 4, (2.5, 2.0))
    with pytest.raises(InvalidInputError):
        train(x, labels, C=1.0, iterations=0)
    with pytest.raises(InvalidInputError):
        train(x, labels, C=1.0, iterations=2, mode="ridge")
    with pytest.raises(InvalidInputError):
        train(x, build_labels(3, 3, (1.5, 1.5)), C=1.0, iterations=2)


def test_interpolate_model_blends_linearly():
    x1, u1 = _instance(8)
    x2, u2 = _instance(9)
    old = model_step_linear(x1, _state_for(u1), C=2.0)
    new = model_step_linear(x2, _state_for(u2), C=2.0)
    same = interpolate_model(old, new, 0.0)
    assert np.array_equal(same.w_hat, old.w_hat)
    swapped = interpolate_model(old, new, 1.0)
    assert np.array_equal(swapped.w_hat, new.w_hat)
    mid = interpolate_model(old, new, 0.25)
    assert np.allclose(mid.w_hat, 0.75 * old.w_hat + 0.25 * new.w_hat)
    assert np.allclose(mid.template_hat,
                       0.75 * old.template_hat + 0.25 * new.template_hat)
    with pytest.raises(InvalidInputError):
        interpolate_model(old, new, 1.5)
    kernel = model_step_kernel(x1, _state_for(u1), C=2.0)
    with pytest.raises(InvalidInputError):
        interpolate_model(old, kernel, 0.5)
