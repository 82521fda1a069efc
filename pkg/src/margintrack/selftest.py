"""Fast built-in sanity checks: fast paths vs. brute-force references."""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import oracles
from .confidence import UpdateGateState, apce, should_update
from .dataset import read_results, write_results
from .detector import find_peaks, respond
from .errors import DegenerateResponseError
from .labels import build_labels
from .optimizer import (SlackState, init_slack, model_step_kernel,
                        model_step_linear, objective, train,
                        training_response, z_step)
from .spectral import idft2

TOLERANCE = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_instance(rng: np.random.Generator, min_side: int = 2):
    h = int(rng.integers(min_side, 9))
    w = int(rng.integers(min_side, 9))
    d = int(rng.integers(1, 4))
    x = rng.standard_normal((h, w, d))
    u = rng.standard_normal((h, w))
    return x, u


def _slack_for(u: np.ndarray) -> SlackState:
    return SlackState(z=np.zeros_like(u), u0_height=float(u.max()), u=u)


def check_linear_model_step(rng, instances: int) -> CheckResult:
    worst = 0.0
    for _ in range(instances):
        x, u = _random_instance(rng)
        C = float(rng.uniform(0.5, 50.0))
        model = model_step_linear(x, _slack_for(u), C)
        fast = idft2(model.w_hat)
        dense = oracles.dense_linear_model(x, u, C)
        worst = max(worst, float(np.abs(fast - dense).max()))
    passed = worst <= TOLERANCE
    return CheckResult("linear-model-step-vs-dense", passed, f"max dev {worst:.3e}")


def check_kernel_model_step(rng, instances: int, kernel: str) -> CheckResult:
    worst = 0.0
    sigma = 0.5
    for _ in range(instances):
        x, u = _random_instance(rng)
        C = float(rng.uniform(0.5, 50.0))
        model = model_step_kernel(x, _slack_for(u), C, kernel=kernel, sigma_k=sigma)
        fast = idft2(model.alpha_hat)
        dense = oracles.dense_kernel_alpha(x, u, C, kernel, sigma)
        worst = max(worst, float(np.abs(fast - dense).max()))
    passed = worst <= TOLERANCE
    return CheckResult(f"{kernel}-kernel-alpha-vs-dense", passed, f"max dev {worst:.3e}")


def check_responses(rng, instances: int) -> CheckResult:
    worst = 0.0
    sigma = 0.5
    for _ in range(instances):
        x, u = _random_instance(rng)
        s = rng.standard_normal(x.shape)
        C = float(rng.uniform(0.5, 50.0))
        state = _slack_for(u)

        model = model_step_linear(x, state, C)
        w_spatial = idft2(model.w_hat)
        worst = max(worst, float(np.abs(
            training_response(model) -
            oracles.dense_training_response_linear(x, w_spatial)).max()))
        worst = max(worst, float(np.abs(
            respond(model, s).values -
            oracles.dense_detection_linear(w_spatial, s)).max()))

        for kernel in ("linear", "gaussian"):
            kmodel = model_step_kernel(x, state, C, kernel=kernel, sigma_k=sigma)
            alpha = idft2(kmodel.alpha_hat)
            worst = max(worst, float(np.abs(
                training_response(kmodel) -
                oracles.dense_training_response_kernel(x, alpha, kernel, sigma)).max()))
            worst = max(worst, float(np.abs(
                respond(kmodel, s).values -
                oracles.dense_detection_kernel(x, alpha, s, kernel, sigma)).max()))
    passed = worst <= TOLERANCE
    return CheckResult("responses-vs-dense", passed, f"max dev {worst:.3e}")


def check_objective_descent(rng, instances: int) -> CheckResult:
    """Each sweep re-anchors the target plane, then the model step must not
    raise the objective under that sweep's (frozen) targets."""
    worst_rise = 0.0
    worst_slack = 0.0
    for _ in range(instances):
        h = int(rng.integers(4, 9))
        w = int(rng.integers(4, 9))
        d = int(rng.integers(1, 4))
        x = rng.standard_normal((h, w, d))
        labels = build_labels(w, h, (w / 2.5, h / 2.5))
        mode = ("linear", "kernel-linear", "kernel-gaussian")[int(rng.integers(3))]
        C = 100.0
        state = init_slack(labels)
        model = None
        for _ in range(8):
            if model is None:
                before = C * float(np.sum(state.u ** 2))  # zero-model baseline
            else:
                state = z_step(model, labels)
                worst_slack = min(worst_slack, float(state.z.min()))
                before = objective(model, labels, state)
            if mode == "linear":
                model = model_step_linear(x, state, C)
            else:
                kernel = "linear" if mode == "kernel-linear" else "gaussian"
                model = model_step_kernel(x, state, C, kernel=kernel)
            after = objective(model, labels, state)
            worst_rise = max(worst_rise, after - before)
    passed = worst_rise <= 1e-9 and worst_slack >= -1e-9
    return CheckResult("objective-non-increasing", passed,
                       f"max rise {worst_rise:.3e}, min slack {worst_slack:.3e}")


def check_apce_values() -> CheckResult:
    cases = []
    cases.append(abs(apce(np.array([[1.0, 0.0], [0.0, 0.0]])) - 4.0))
    cases.append(abs(apce(np.array([[3.0, 1.0], [1.0, 1.0]])) - 4.0))
    n = 24
    impulse = np.zeros((4, 6))
    impulse[1, 2] = 5.0
    cases.append(abs(apce(impulse) - n))
    degenerate_ok = False
    try:
        apce(np.full((3, 3), 2.5))
    except DegenerateResponseError:
        degenerate_ok = True
    r = np.random.default_rng(7).standard_normal((5, 7))
    cases.append(abs(apce(r) - apce(3.7 * r)))
    worst = max(cases)
    passed = worst <= 1e-10 and degenerate_ok
    return CheckResult("peak-sharpness-values", passed,
                       f"max dev {worst:.3e}, degenerate raises: {degenerate_ok}")


def check_shift_equivariance(rng, instances: int) -> CheckResult:
    bad = 0
    for _ in range(instances):
        h = int(rng.integers(5, 9))
        w = int(rng.integers(5, 9))
        x = rng.standard_normal((h, w, 2))
        labels = build_labels(w, h, (w / 3, h / 3))
        model, _ = train(x, labels, 100.0, 3, mode="kernel-linear")
        dy = int(rng.integers(0, h))
        dx = int(rng.integers(0, w))
        response = respond(model, oracles.roll2(x, dy, dx))
        if response.peak_pos != (dx, dy):
            bad += 1
    return CheckResult("detection-shift-equivariance", bad == 0,
                       f"{bad}/{instances} mislocated")


def check_peak_finder() -> CheckResult:
    r = np.zeros((9, 9))
    r[2, 2] = 1.0
    r[7, 7] = 0.8
    r[2, 7] = 0.3
    peaks = find_peaks(r, theta=0.7)
    ok = peaks.positions[0] == (2, 2) and (7, 7) in peaks.positions
    ok = ok and (7, 2) not in peaks.positions  # below ratio
    return CheckResult("peak-finder-ratio-test", bool(ok),
                       f"peaks {peaks.positions}")


def check_gate() -> CheckResult:
    gate = UpdateGateState()
    first, gate = should_update(gate, 1.0, 20.0, 0.7, 0.45)
    strong, gate = should_update(gate, 1.0, 20.0, 0.7, 0.45)
    weak, gate = should_update(gate, 0.2, 2.0, 0.7, 0.45)
    nan_decision, gate_after_nan = should_update(gate, float("nan"), 5.0, 0.7, 0.45)
    ok = first and strong and not weak and not nan_decision
    ok = ok and gate_after_nan == gate and gate.count == 3
    return CheckResult("update-gate-behavior", bool(ok),
                       f"count {gate.count}, means ({gate.mean_f_max:.3f}, "
                       f"{gate.mean_apce:.3f})")


def check_labels() -> CheckResult:
    labels = build_labels(16, 12, (4.0, 3.0))
    ok = labels.score[0, 0] == 1.0 and labels.loss_root[0, 0] == 0.0
    expected = np.sqrt(np.clip(1.0 - labels.score, 0.0, None))
    ok = ok and np.abs(labels.loss_root - expected).max() <= 1e-12
    ok = ok and labels.score.max() == 1.0
    return CheckResult("label-field-shape", bool(ok),
                       f"sigma {labels.sigma:.3f}")


def check_log_round_trip() -> CheckResult:
    records = [{"frame_index": i, "box": [1.0 * i, 2.0, 3.0, 4.0], "f_max": 0.5,
                "primary_f_max": 0.5, "apce": 10.0, "updated": True,
                "peaks_considered": 1, "latency_ms": 0.0, "scale": 1.0,
                "failed": False} for i in range(3)]
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "log.jsonl"
        write_results(path, "demo", {"padding": 1.5}, records)
        first = path.read_bytes()
        write_results(path, "demo", {"padding": 1.5}, records)
        identical = path.read_bytes() == first
        header, loaded = read_results(path)
    ok = identical and header["sequence"] == "demo" and loaded == records
    return CheckResult("result-log-round-trip", bool(ok),
                       f"bit-identical rewrite: {identical}")


def run_selftest(instances: int = 25, seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = [
        check_linear_model_step(rng, instances),
        check_kernel_model_step(rng, instances, "linear"),
        check_kernel_model_step(rng, instances, "gaussian"),
        check_responses(rng, max(5, instances // 3)),
        check_objective_descent(rng, max(5, instances // 3)),
        check_apce_values(),
        check_shift_equivariance(rng, max(5, instances // 3)),
        check_peak_finder(),
        check_gate(),
        check_labels(),
        check_log_round_trip(),
    ]
    return results
