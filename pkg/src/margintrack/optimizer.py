"""Structured large-margin training over circulant shifted samples.

The training set for one patch is the grid of all cyclic shifts of its
feature map: sample (dy, dx) is the map rolled by (dy, dx).  The classifier
is fit by alternating two closed-form steps:

* slack step: given the current model, score every shift, place the target
  plane at the height of the best peak, and clamp the slack to keep scores
  at least one margin-loss below the plane;
* model step: ridge-regress the model so that the score of shift k matches
  u[k] = plane_height - loss_root[k] - slack[k], solved independently per
  frequency thanks to the circulant structure.

Both a primal model (explicit spatial weights, "linear" mode) and a dual
model (per-shift coefficients under a linear or Gaussian kernel) are
supported; with a linear kernel the two produce identical responses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalError
from .labels import LabelField
from .spectral import dft2, gaussian_kernel_corr, idft2, linear_kernel_corr

MODES = ("linear", "kernel-linear", "kernel-gaussian")
_DENOM_FLOOR = 1e-12


@dataclass(frozen=True)
class DualModel:
    """Trained classifier plus the (windowed) template it was fit on."""

    mode: str                      # one of MODES
    template_hat: np.ndarray       # (H, W, D) complex spectrum of training features
    w_hat: np.ndarray | None       # (H, W, D) complex, primal mode only
    alpha_hat: np.ndarray | None   # (H, W) complex, kernel modes only
    C: float
    sigma_k: float                 # Gaussian kernel bandwidth (kernel-gaussian only)

    @property
    def grid(self) -> tuple[int, int]:
        return self.template_hat.shape[0], self.template_hat.shape[1]


@dataclass(frozen=True)
class SlackState:
    """Slack surface, target plane height, and the resulting regression target."""

    z: np.ndarray          # (H, W) float64, nonnegative
    u0_height: float       # height of the target plane
    u: np.ndarray          # (H, W) float64, u0_height - loss_root - z


def init_slack(labels: LabelField) -> SlackState:
    """Fresh-start slack state: zero slack, unit plane."""
    z = np.zeros_like(labels.loss_root)
    return SlackState(z=z, u0_height=1.0, u=1.0 - labels.loss_root)


def _validate_features(features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 3:
        raise InvalidInputError(f"expected (H, W, D) features, got shape {features.shape}")
    return features


def _auto_spectrum(template_hat: np.ndarray, mode: str, sigma_k: float) -> np.ndarray:
    """Real spectrum of the kernel vector between a template and its own shifts."""
    if mode == "kernel-gaussian":
        g_hat = gaussian_kernel_corr(template_hat, template_hat, sigma_k)
    else:
        g_hat = linear_kernel_corr(template_hat, template_hat)
    # the kernel vector is symmetric, so its spectrum is real up to float noise
    return np.real(g_hat)


def _kernel_auto_spectrum(model: DualModel) -> np.ndarray:
    """Auto-kernel spectrum of the model's template, memoized on the instance.

    Depends only on the (immutable) template, and the alternating trainer
    needs it on every sweep, so computing it once per model pays off.
    """
    cached = model.__dict__.get("_auto_hat")
    if cached is None:
        cached = _auto_spectrum(model.template_hat, model.mode, model.sigma_k)
        object.__setattr__(model, "_auto_hat", cached)
    return cached


def model_step_linear(features: np.ndarray, state: SlackState, C: float) -> DualModel:
    """Closed-form primal ridge step: w_hat_d = x_hat_d * u_hat / (sum_d |x_hat_d|^2 + 1/(2C))."""
    features = _validate_features(features)
    return _model_step_linear_hat(dft2(features), state.u, C)


def _model_step_linear_hat(x_hat: np.ndarray, u: np.ndarray, C: float) -> DualModel:
    if C <= 0:
        raise InvalidInputError(f"C must be positive, got {C}")
    if u.shape != x_hat.shape[:2]:
        raise InvalidInputError(f"target shape {u.shape} does not match grid {x_hat.shape[:2]}")
    u_hat = dft2(u)
    denom = np.sum(np.abs(x_hat) ** 2, axis=2) + 1.0 / (2.0 * C)
    w_hat = x_hat * (u_hat / denom)[:, :, np.newaxis]
    return DualModel(mode="linear", template_hat=x_hat, w_hat=w_hat,
                     alpha_hat=None, C=C, sigma_k=0.0)


def model_step_kernel(features: np.ndarray, state: SlackState, C: float,
                      kernel: str = "linear", sigma_k: float = 0.5) -> DualModel:
    """Closed-form dual step: alpha_hat = u_hat / (kernel_auto_spectrum + 1/(2C))."""
    features = _validate_features(features)
    return _model_step_kernel_hat(dft2(features), state.u, C, kernel, sigma_k)


def _model_step_kernel_hat(x_hat: np.ndarray, u: np.ndarray, C: float,
                           kernel: str, sigma_k: float,
                           g_hat: np.ndarray | None = None) -> DualModel:
    if C <= 0:
        raise InvalidInputError(f"C must be positive, got {C}")
    if kernel not in ("linear", "gaussian"):
        raise InvalidInputError(f"kernel must be 'linear' or 'gaussian', got {kernel!r}")
    if u.shape != x_hat.shape[:2]:
        raise InvalidInputError(f"target shape {u.shape} does not match grid {x_hat.shape[:2]}")
    mode = "kernel-linear" if kernel == "linear" else "kernel-gaussian"
    if g_hat is None:
        g_hat = _auto_spectrum(x_hat, mode, sigma_k)
    denom = g_hat + 1.0 / (2.0 * C)
    if np.min(np.abs(denom)) < _DENOM_FLOOR:
        raise NumericalError(
            f"kernel ridge denominator below {_DENOM_FLOOR}: degenerate features or huge C")
    alpha_hat = dft2(u) / denom
    model = DualModel(mode=mode, template_hat=x_hat, w_hat=None,
                      alpha_hat=alpha_hat, C=C, sigma_k=sigma_k)
    object.__setattr__(model, "_auto_hat", g_hat)
    return model


def training_response(model: DualModel) -> np.ndarray:
    """Score of every cyclic shift of the model's own training patch."""
    if model.mode == "linear":
        return idft2(linear_kernel_corr(model.template_hat, model.w_hat))
    return idft2(_kernel_auto_spectrum(model) * model.alpha_hat)


def z_step(model: DualModel, labels: LabelField,
           features: np.ndarray | None = None) -> SlackState:
    """Slack update: raise the plane to the response peak, clamp slack at zero.

    ``features`` may supply a fresh patch to score; by default the model's
    stored template is used (the usual alternating-training case).
    """
    if labels.loss_root.shape != model.grid:
        raise InvalidInputError(
            f"label grid {labels.loss_root.shape} does not match model grid {model.grid}")
    if features is None:
        r = training_response(model)
    else:
        features = _validate_features(features)
        if features.shape[:2] != model.grid:
            raise InvalidInputError(
                f"feature grid {features.shape[:2]} does not match model grid {model.grid}")
        s_hat = dft2(features)
        if model.mode == "linear":
            r = idft2(linear_kernel_corr(s_hat, model.w_hat))
        elif model.mode == "kernel-linear":
            r = idft2(linear_kernel_corr(s_hat, model.template_hat) * model.alpha_hat)
        else:
            r = idft2(gaussian_kernel_corr(s_hat, model.template_hat, model.sigma_k)
                      * model.alpha_hat)
    u0_height = float(np.max(r))
    z = np.maximum(u0_height - r - labels.loss_root, 0.0)
    u = u0_height - labels.loss_root - z
    return SlackState(z=z, u0_height=u0_height, u=u)


def model_norm_sq(model: DualModel) -> float:
    """Squared norm of the implicit weight vector, via Parseval."""
    h, w = model.grid
    n = h * w
    if model.mode == "linear":
        return float(np.sum(np.abs(model.w_hat) ** 2)) / n
    g_hat = _kernel_auto_spectrum(model)
    return float(np.sum(g_hat * np.abs(model.alpha_hat) ** 2)) / n


def objective(model: DualModel, labels: LabelField, state: SlackState) -> float:
    """Quadratic-slack training objective 0.5*||w||^2 + C*sum((r - u)^2).

    Evaluated with the plane height frozen at ``state.u0_height`` (the
    regression target ``state.u`` already encodes it); used by tests to
    check that alternating sweeps never increase it.
    """
    r = training_response(model)
    residual = r - state.u
    return 0.5 * model_norm_sq(model) + model.C * float(np.sum(residual * residual))


def train(features: np.ndarray, labels: LabelField, C: float, iterations: int,
          mode: str = "kernel-linear", sigma_k: float = 0.5
          ) -> tuple[DualModel, SlackState]:
    """Alternate model and slack steps from the fresh-start state.

    Iteration i fits the model to the current target plane, then re-scores
    the patch to update the plane height and slack for iteration i+1.  The
    returned slack state corresponds to the returned model.
    """
    if iterations < 1:
        raise InvalidInputError(f"iterations must be >= 1, got {iterations}")
    if mode not in MODES:
        raise InvalidInputError(f"mode must be one of {MODES}, got {mode!r}")
    features = _validate_features(features)
    if features.shape[0] != labels.loss_root.shape[0] or \
            features.shape[1] != labels.loss_root.shape[1]:
        raise InvalidInputError(
            f"feature grid {features.shape[:2]} does not match "
            f"label grid {labels.loss_root.shape}")
    x_hat = dft2(features)
    state = init_slack(labels)
    model: DualModel | None = None
    g_hat: np.ndarray | None = None
    kernel = "linear" if mode == "kernel-linear" else "gaussian"
    for _ in range(iterations):
        if mode == "linear":
            model = _model_step_linear_hat(x_hat, state.u, C)
        else:
            model = _model_step_kernel_hat(x_hat, state.u, C, kernel, sigma_k, g_hat)
            g_hat = _kernel_auto_spectrum(model)
        state = z_step(model, labels)
    return model, state


def interpolate_model(old: DualModel, new: DualModel, eta: float) -> DualModel:
    """Blend coefficients and template: (1 - eta) * old + eta * new."""
    if not 0.0 <= eta <= 1.0:
        raise InvalidInputError(f"eta must be in [0, 1], got {eta}")
    if old.mode != new.mode:
        raise InvalidInputError(f"cannot blend models of modes {old.mode!r} and {new.mode!r}")
    if old.template_hat.shape != new.template_hat.shape:
        raise InvalidInputError(
            f"cannot blend models with grids {old.template_hat.shape} "
            f"and {new.template_hat.shape}")
    blend = lambda a, b: None if a is None else (1.0 - eta) * a + eta * b
    return DualModel(mode=old.mode,
                     template_hat=blend(old.template_hat, new.template_hat),
                     w_hat=blend(old.w_hat, new.w_hat),
                     alpha_hat=blend(old.alpha_hat, new.alpha_hat),
                     C=new.C, sigma_k=new.sigma_k)
