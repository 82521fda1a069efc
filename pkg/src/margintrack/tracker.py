"""Single-object tracker: detection, scale estimation, gated model updates."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .confidence import UpdateGateState, apce, should_update
from .detector import PatchGeometry, multimodal_detect, windowed_features
from .errors import DegenerateResponseError, InvalidInputError
from .features import window2d
from .labels import build_labels
from .optimizer import MODES, interpolate_model, train
from .scale import estimate_scale, make_scale_model, scale_features, train_scale

_MIN_TARGET_PX = 8.0


@dataclass(frozen=True)
class TrackerConfig:
    """Tunable parameters; the defaults are the published operating point."""

    padding: float = 1.5           # search region margin around the target
    eta: float = 0.015             # model interpolation rate
    theta: float = 0.7             # secondary-peak ratio threshold
    beta1: float = 0.7             # peak-value gate fraction
    beta2: float = 0.45            # peak-sharpness gate fraction
    C: float = 10000.0             # slack penalty weight
    mode: str = "kernel-linear"    # linear | kernel-linear | kernel-gaussian
    sigma_k: float = 0.5           # Gaussian kernel bandwidth
    cell_size: int = 4
    sigma_factor: float = 0.1      # label bandwidth per sqrt(target cell area)
    init_iterations: int = 10
    update_iterations: int = 3
    template_max_cells: int = 64   # cap on the feature grid per side
    num_scales: int = 33
    scale_factor: float = 1.02
    scale_sigma: float = 1.0       # scale label bandwidth in ladder levels
    scale_lam: float = 0.01
    scale_eta: float = 0.015
    scale_template_side: int = 32
    multimodal: bool = True
    always_update: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInputError(f"mode must be one of {MODES}, got {self.mode!r}")
        positive = ("padding", "eta", "theta", "beta1", "beta2", "C", "sigma_k",
                    "cell_size", "sigma_factor", "init_iterations",
                    "update_iterations", "template_max_cells", "num_scales",
                    "scale_sigma", "scale_lam", "scale_eta", "scale_template_side")
        for name in positive:
            if getattr(self, name) <= 0:
                raise InvalidInputError(f"config field {name} must be positive")
        if not 0.0 < self.eta <= 1.0 or not 0.0 < self.scale_eta <= 1.0:
            raise InvalidInputError("learning rates must lie in (0, 1]")
        if not 0.0 <= self.theta <= 1.0:
            raise InvalidInputError("theta must lie in [0, 1]")
        if self.num_scales > 1 and self.scale_factor <= 1.0:
            raise InvalidInputError("scale_factor must exceed 1 when num_scales > 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "TrackerConfig":
        known = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in known:
                raise InvalidInputError(f"unknown config key {key!r}")
            kwargs[key] = raw
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict | None = None) -> "TrackerConfig":
        """Parse a flat ``key = value`` text file (# starts a comment)."""
        values: dict = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            values[key] = _coerce(key, raw, path, lineno)
        if overrides:
            values.update(overrides)
        return cls.from_dict(values)


def _coerce(key: str, raw: str, path, lineno: int):
    kinds = {f.name: f.type for f in fields(TrackerConfig)}
    if key not in kinds:
        raise InvalidInputError(f"{path}:{lineno}: unknown config key {key!r}")
    kind = kinds[key]
    try:
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise InvalidInputError(f"{path}:{lineno}: bad value for {key}: {raw!r}") from exc


@dataclass
class FrameResult:
    frame_index: int
    box: tuple[float, float, float, float]
    f_max: float
    primary_f_max: float
    apce: float                  # 0.0 when undefined (init, degenerate, failed)
    updated: bool
    peaks_considered: int
    latency_ms: float
    scale: float
    failed: bool = False


class Tracker:
    """Stateful tracker over a frame stream; call init() once, then step()."""

    def __init__(self, config: TrackerConfig | None = None):
        self.config = config or TrackerConfig()
        self._initialized = False

    # ------------------------------------------------------------------ init

    def init(self, frame: np.ndarray, box: tuple[float, float, float, float]) -> FrameResult:
        """Fit the model on the first frame's annotated target box."""
        cfg = self.config
        frame = self._check_frame(frame, first=True)
        x, y, bw, bh = (float(v) for v in box)
        if bw <= 0 or bh <= 0:
            raise InvalidInputError(f"box must have positive size, got {box}")
        fh, fw = frame.shape[:2]
        if x + bw <= 0 or y + bh <= 0 or x >= fw or y >= fh:
            raise InvalidInputError(f"box {box} does not intersect the frame")

        start = time.perf_counter()
        padded_w = bw * (1.0 + cfg.padding)
        padded_h = bh * (1.0 + cfg.padding)
        cap_px = cfg.cell_size * cfg.template_max_cells
        shrink = max(1.0, padded_w / cap_px, padded_h / cap_px)
        grid_w = min(cfg.template_max_cells,
                     max(4, int(round(padded_w / shrink / cfg.cell_size))))
        grid_h = min(cfg.template_max_cells,
                     max(4, int(round(padded_h / shrink / cfg.cell_size))))
        tw, th = grid_w * cfg.cell_size, grid_h * cfg.cell_size
        self._geom = PatchGeometry(
            base_size=(bw, bh), padding=cfg.padding, template_size=(tw, th),
            cell_size=cfg.cell_size, template_scale=(padded_w / tw, padded_h / th))
        self._window = window2d(grid_w, grid_h)
        cell_w = cfg.cell_size * self._geom.template_scale[0]
        cell_h = cfg.cell_size * self._geom.template_scale[1]
        self._labels = build_labels(grid_w, grid_h, (bw / cell_w, bh / cell_h),
                                    cfg.sigma_factor)

        self.center = (x + bw / 2.0, y + bh / 2.0)
        self.scale = 1.0
        self._min_scale = min(1.0, max(_MIN_TARGET_PX / bw, _MIN_TARGET_PX / bh))
        self._max_scale = max(1.0, min(fw / bw, fh / bh))

        feats = windowed_features(frame, self.center, self._geom, 1.0, self._window)
        self.model, self.slack = train(feats, self._labels, cfg.C,
                                       cfg.init_iterations, cfg.mode, cfg.sigma_k)
        self.scale_model = make_scale_model(
            (bw, bh), cfg.num_scales, cfg.scale_factor, cfg.scale_sigma,
            cfg.scale_lam, cfg.scale_template_side, cfg.cell_size)
        self.scale_model = train_scale(self.scale_model, frame, self.center,
                                       1.0, 1.0)
        self.gate = UpdateGateState()
        self.frame_index = 0
        self._initialized = True
        latency = (time.perf_counter() - start) * 1000.0
        return FrameResult(frame_index=0, box=self.box(), f_max=0.0,
                           primary_f_max=0.0, apce=0.0, updated=True,
                           peaks_considered=0, latency_ms=latency, scale=1.0)

    # ------------------------------------------------------------------ step

    def step(self, frame: np.ndarray) -> FrameResult:
        """Track the target into the next frame; returns the frame's diagnostics."""
        if not self._initialized:
            raise InvalidInputError("step() called before init()")
        cfg = self.config
        frame = self._check_frame(frame)
        start = time.perf_counter()
        self.frame_index += 1

        det = multimodal_detect(self.model, frame, self.center, self._geom,
                                self.scale, self._window, cfg.theta, cfg.multimodal)
        if det.failed:
            latency = (time.perf_counter() - start) * 1000.0
            return FrameResult(frame_index=self.frame_index, box=self.box(),
                               f_max=0.0, primary_f_max=0.0, apce=0.0,
                               updated=False, peaks_considered=0,
                               latency_ms=latency, scale=self.scale, failed=True)

        fh, fw = frame.shape[:2]
        self.center = (float(np.clip(det.center[0], 0.0, fw - 1.0)),
                       float(np.clip(det.center[1], 0.0, fh - 1.0)))
        prior_scale = self.scale
        pyramid = scale_features(self.scale_model, frame, self.center, prior_scale)
        new_scale = estimate_scale(self.scale_model, frame, self.center,
                                   prior_scale, features=pyramid)
        self.scale = float(np.clip(new_scale, self._min_scale, self._max_scale))

        try:
            apce_value = apce(det.response)
            degenerate = False
        except DegenerateResponseError:
            apce_value = 0.0
            degenerate = True

        if degenerate:
            decision = False  # history untouched: no defined sharpness to accumulate
        else:
            decision, self.gate = should_update(self.gate, det.f_max, apce_value,
                                                cfg.beta1, cfg.beta2)
        if cfg.always_update:
            decision = True

        if decision:
            feats = windowed_features(frame, self.center, self._geom, self.scale,
                                      self._window)
            new_model, self.slack = train(feats, self._labels, cfg.C,
                                          cfg.update_iterations, cfg.mode, cfg.sigma_k)
            self.model = interpolate_model(self.model, new_model, cfg.eta)
            self.scale_model = train_scale(
                self.scale_model, frame, self.center, self.scale, cfg.scale_eta,
                features=pyramid if self.scale == prior_scale else None)

        latency = (time.perf_counter() - start) * 1000.0
        return FrameResult(frame_index=self.frame_index, box=self.box(),
                           f_max=det.f_max, primary_f_max=det.primary_f_max,
                           apce=apce_value, updated=decision,
                           peaks_considered=det.peaks_considered,
                           latency_ms=latency, scale=self.scale)

    # ------------------------------------------------------------------ misc

    def box(self) -> tuple[float, float, float, float]:
        """Current target box (x, y, w, h), position clamped into the frame."""
        bw = self._geom.base_size[0] * self.scale
        bh = self._geom.base_size[1] * self.scale
        fh, fw = self._frame_shape
        x = self.center[0] - bw / 2.0
        y = self.center[1] - bh / 2.0
        x = (fw - bw) / 2.0 if bw > fw else min(max(x, 0.0), fw - bw)
        y = (fh - bh) / 2.0 if bh > fh else min(max(y, 0.0), fh - bh)
        return (x, y, bw, bh)

    def _check_frame(self, frame: np.ndarray, first: bool = False) -> np.ndarray:
        frame = np.asarray(frame)
        if frame.ndim not in (2, 3) or (frame.ndim == 3 and frame.shape[2] not in (1, 3)):
            raise InvalidInputError(f"expected (H, W) or (H, W, {{1,3}}) frame, "
                                    f"got shape {frame.shape}")
        if frame.shape[0] < 1 or frame.shape[1] < 1:
            raise InvalidInputError("frame is empty")
        if frame.ndim == 3 and frame.shape[2] == 1:
            frame = frame[:, :, 0]
        if first:
            self._frame_shape = frame.shape[:2]
            self._frame_channels = frame.ndim
        elif frame.shape[:2] != self._frame_shape or frame.ndim != self._frame_channels:
            raise InvalidInputError(
                f"frame shape {frame.shape} differs from first frame {self._frame_shape}")
        return frame
