"""Request/response models for the tracking service."""

from __future__ import annotations

from pydantic import BaseModel, Field

Box = tuple[float, float, float, float]


class ConfigModel(BaseModel):
    """Partial tracker configuration; omitted fields keep their defaults."""

    padding: float | None = None
    eta: float | None = None
    theta: float | None = None
    beta1: float | None = None
    beta2: float | None = None
    C: float | None = None
    mode: str | None = None
    sigma_k: float | None = None
    cell_size: int | None = None
    sigma_factor: float | None = None
    init_iterations: int | None = None
    update_iterations: int | None = None
    template_max_cells: int | None = None
    num_scales: int | None = None
    scale_factor: float | None = None
    scale_sigma: float | None = None
    scale_lam: float | None = None
    scale_eta: float | None = None
    scale_template_side: int | None = None
    multimodal: bool | None = None
    always_update: bool | None = None

    def overrides(self) -> dict:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class FrameResultModel(BaseModel):
    frame_index: int
    box: Box
    f_max: float
    primary_f_max: float
    apce: float
    updated: bool
    peaks_considered: int
    latency_ms: float
    scale: float
    failed: bool


class CreateSessionRequest(BaseModel):
    config: ConfigModel | None = None


class CreateSessionResponse(BaseModel):
    session_id: str
    config: dict


class InitRequest(BaseModel):
    frame: str = Field(description="base64-encoded PNG or JPEG image")
    box: Box


class StepRequest(BaseModel):
    frame: str = Field(description="base64-encoded PNG or JPEG image")


class DeleteSessionResponse(BaseModel):
    deleted: bool
    session_id: str


class TrackRequest(BaseModel):
    sequence_dir: str
    config: ConfigModel | None = None
    config_file: str | None = None
    out: str | None = None
    overlay_dir: str | None = None
    timing: bool = False


class TrackResponse(BaseModel):
    sequence: str
    n_frames: int
    mean_fps: float
    update_rate: float
    results: list[FrameResultModel]
    out: str | None = None


class BenchRequest(BaseModel):
    root: str
    out_dir: str
    config: ConfigModel | None = None
    config_file: str | None = None
    filter: list[str] | None = None
    jobs: int = 1
    timing: bool = False


class SequenceScoreModel(BaseModel):
    name: str
    n_frames: int
    precision_at_20: float
    auc: float
    mean_center_error: float
    mean_overlap: float


class BenchResponse(BaseModel):
    sequences: list[SequenceScoreModel]
    precision_at_20: float
    auc: float
    out_dir: str


class SynthRequest(BaseModel):
    kind: str
    out_dir: str
    seed: int = 0
    num_frames: int | None = None


class SynthResponse(BaseModel):
    path: str
    sequence: str
    n_frames: int


class SelftestRequest(BaseModel):
    instances: int = 25
    seed: int = 0


class CheckModel(BaseModel):
    name: str
    passed: bool
    detail: str


class SelftestResponse(BaseModel):
    passed: bool
    checks: list[CheckModel]


class ErrorResponse(BaseModel):
    detail: str
