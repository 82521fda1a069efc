"""HTTP interface: streaming tracking sessions plus batch operations."""

from __future__ import annotations

import base64
import binascii
import threading
import uuid
from dataclasses import asdict
from pathlib import Path

import cv2
import numpy as np
from fastapi import FastAPI, HTTPException

from ..dataset import (SYNTH_KINDS, find_sequences, load_sequence,
                       synthesize_sequence, write_synthetic)
from ..errors import InvalidInputError, SequenceFormatError, TrackingError
from ..runner import bench_run, run_and_log, track_sequence
from ..selftest import run_selftest
from ..tracker import Tracker, TrackerConfig
from . import schemas


class _Session:
    def __init__(self, config: TrackerConfig):
        self.tracker = Tracker(config)
        self.lock = threading.Lock()
        self.initialized = False


def _decode_frame(data: str) -> np.ndarray:
    try:
        raw = base64.b64decode(data, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise HTTPException(status_code=422, detail="frame is not valid base64") from exc
    buf = np.frombuffer(raw, dtype=np.uint8)
    image = cv2.imdecode(buf, cv2.IMREAD_COLOR)
    if image is None:
        raise HTTPException(status_code=422, detail="frame did not decode as an image")
    return cv2.cvtColor(image, cv2.COLOR_BGR2RGB)


def _build_config(config: schemas.ConfigModel | None,
                  config_file: str | None = None) -> TrackerConfig:
    try:
        overrides = config.overrides() if config is not None else {}
        if config_file is not None:
            return TrackerConfig.from_file(config_file, overrides)
        return TrackerConfig.from_dict(overrides)
    except (InvalidInputError, OSError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def create_app() -> FastAPI:
    app = FastAPI(title="margintrack", version="0.1.0")
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/defaults")
    def defaults():
        return TrackerConfig().to_dict()

    # ------------------------------------------------------------- sessions

    @app.post("/sessions", response_model=schemas.CreateSessionResponse)
    def create_session(request: schemas.CreateSessionRequest):
        config = _build_config(request.config)
        session_id = uuid.uuid4().hex
        with registry_lock:
            sessions[session_id] = _Session(config)
        return schemas.CreateSessionResponse(session_id=session_id,
                                             config=config.to_dict())

    def _get_session(session_id: str) -> _Session:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404,
                                detail=f"no session {session_id!r}")
        return session

    @app.post("/sessions/{session_id}/init",
              response_model=schemas.FrameResultModel)
    def init_session(session_id: str, request: schemas.InitRequest):
        session = _get_session(session_id)
        frame = _decode_frame(request.frame)
        with session.lock:
            try:
                result = session.tracker.init(frame, request.box)
            except TrackingError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            session.initialized = True
        return schemas.FrameResultModel(**asdict(result))

    @app.post("/sessions/{session_id}/frames",
              response_model=schemas.FrameResultModel)
    def step_session(session_id: str, request: schemas.StepRequest):
        session = _get_session(session_id)
        frame = _decode_frame(request.frame)
        with session.lock:
            if not session.initialized:
                raise HTTPException(status_code=409,
                                    detail="session has no init frame yet")
            try:
                result = session.tracker.step(frame)
            except TrackingError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        return schemas.FrameResultModel(**asdict(result))

    @app.delete("/sessions/{session_id}",
                response_model=schemas.DeleteSessionResponse)
    def delete_session(session_id: str):
        with registry_lock:
            found = sessions.pop(session_id, None)
        if found is None:
            raise HTTPException(status_code=404,
                                detail=f"no session {session_id!r}")
        return schemas.DeleteSessionResponse(deleted=True, session_id=session_id)

    # ---------------------------------------------------------------- batch

    @app.post("/track", response_model=schemas.TrackResponse)
    def track(request: schemas.TrackRequest):
        config = _build_config(request.config, request.config_file)
        try:
            sequence = load_sequence(request.sequence_dir)
            if request.out is not None:
                results = run_and_log(sequence, config, request.out,
                                      timing=request.timing,
                                      overlay_dir=request.overlay_dir)
            else:
                results = track_sequence(sequence, config,
                                         overlay_dir=request.overlay_dir)
        except (SequenceFormatError, TrackingError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        step_ms = [r.latency_ms for r in results[1:]]
        mean_ms = float(np.mean(step_ms)) if step_ms else 0.0
        records = [schemas.FrameResultModel(**asdict(r)) for r in results]
        if not request.timing:  # mirror what the log records
            records = [r.model_copy(update={"latency_ms": 0.0}) for r in records]
        return schemas.TrackResponse(
            sequence=sequence.name, n_frames=len(results),
            mean_fps=1000.0 / mean_ms if mean_ms > 0 else 0.0,
            update_rate=sum(r.updated for r in results) / len(results),
            results=records, out=request.out)

    @app.post("/bench", response_model=schemas.BenchResponse)
    def bench(request: schemas.BenchRequest):
        config = _build_config(request.config, request.config_file)
        try:
            dirs = find_sequences(request.root)
            if request.filter:
                wanted = set(request.filter)
                dirs = [d for d in dirs if d.name in wanted]
                missing = wanted - {d.name for d in dirs}
                if missing:
                    raise HTTPException(
                        status_code=422,
                        detail=f"no such sequences: {sorted(missing)}")
            report = bench_run(dirs, config, request.out_dir,
                               jobs=request.jobs, timing=request.timing)
        except (SequenceFormatError, TrackingError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return schemas.BenchResponse(
            sequences=[schemas.SequenceScoreModel(
                name=s.name, n_frames=s.n_frames,
                precision_at_20=s.precision_at_20, auc=s.auc,
                mean_center_error=s.mean_center_error,
                mean_overlap=s.mean_overlap) for s in report.scores],
            precision_at_20=report.precision_at_20, auc=report.auc,
            out_dir=str(Path(request.out_dir)))

    @app.post("/synth", response_model=schemas.SynthResponse)
    def synth(request: schemas.SynthRequest):
        if request.kind not in SYNTH_KINDS:
            raise HTTPException(status_code=422,
                                detail=f"kind must be one of {SYNTH_KINDS}")
        sequence = synthesize_sequence(request.kind, request.seed,
                                       request.num_frames)
        path = write_synthetic(sequence, request.out_dir)
        return schemas.SynthResponse(path=str(path), sequence=sequence.name,
                                     n_frames=sequence.n_frames)

    @app.post("/selftest", response_model=schemas.SelftestResponse)
    def selftest(request: schemas.SelftestRequest):
        checks = run_selftest(request.instances, request.seed)
        return schemas.SelftestResponse(
            passed=all(c.passed for c in checks),
            checks=[schemas.CheckModel(**asdict(c)) for c in checks])

    return app


app = create_app()
