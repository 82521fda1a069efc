"""Sequence I/O: OTB-style directories, synthetic fixtures, result logs."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .errors import ResultLogError, SequenceFormatError

LOG_FORMAT = "tracklog/1"
_IMAGE_EXTS = (".jpg", ".jpeg", ".png", ".bmp")
SYNTH_KINDS = ("translate", "scale_ramp", "occlude", "distractor")


def imread_rgb(path: str | Path) -> np.ndarray:
    image = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if image is None:
        raise SequenceFormatError(f"could not read image {path}")
    return cv2.cvtColor(image, cv2.COLOR_BGR2RGB)


@dataclass
class Sequence:
    """A named frame stream with ground-truth boxes (x, y, w, h) per frame."""

    name: str
    ground_truth: np.ndarray              # (N, 4) float, 0-indexed pixel coords
    frame_paths: list[Path] | None = None
    frames: list[np.ndarray] | None = None
    attributes: tuple[str, ...] = ()

    def __post_init__(self):
        self.ground_truth = np.asarray(self.ground_truth, dtype=np.float64)
        if self.ground_truth.ndim != 2 or self.ground_truth.shape[1] != 4:
            raise SequenceFormatError(
                f"ground truth must be (N, 4), got {self.ground_truth.shape}")
        if self.n_frames == 0:
            raise SequenceFormatError(f"sequence {self.name!r} has no frames")

    @property
    def n_frames(self) -> int:
        stored = self.frame_paths if self.frames is None else self.frames
        if stored is None:
            raise SequenceFormatError(f"sequence {self.name!r} has no frame source")
        return min(len(stored), len(self.ground_truth))

    @property
    def init_box(self) -> tuple[float, float, float, float]:
        return tuple(float(v) for v in self.ground_truth[0])

    def frame(self, index: int) -> np.ndarray:
        if not 0 <= index < self.n_frames:
            raise IndexError(f"frame index {index} out of range [0, {self.n_frames})")
        if self.frames is not None:
            return self.frames[index]
        return imread_rgb(self.frame_paths[index])


def _parse_groundtruth(path: Path) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = re.split(r"[,\s]+", line)
        if len(parts) != 4:
            raise SequenceFormatError(f"{path}:{lineno}: expected 4 values, got {line!r}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise SequenceFormatError(f"{path}:{lineno}: bad number in {line!r}") from exc
    if not rows:
        raise SequenceFormatError(f"{path} contains no boxes")
    boxes = np.asarray(rows, dtype=np.float64)
    boxes[:, :2] -= 1.0  # annotations use 1-indexed pixel coordinates
    return boxes


def load_sequence(path: str | Path) -> Sequence:
    """Load one sequence directory: img/*.jpg + groundtruth_rect.txt (+ meta.json)."""
    root = Path(path)
    if not root.is_dir():
        raise SequenceFormatError(f"{root} is not a directory")
    gt_file = root / "groundtruth_rect.txt"
    if not gt_file.exists():
        candidates = sorted(root.glob("groundtruth_rect*.txt"))
        if not candidates:
            raise SequenceFormatError(f"{root} has no groundtruth_rect.txt")
        gt_file = candidates[0]
    boxes = _parse_groundtruth(gt_file)

    img_dir = root / "img" if (root / "img").is_dir() else root
    frame_paths = sorted(p for p in img_dir.iterdir()
                         if p.suffix.lower() in _IMAGE_EXTS)
    if not frame_paths:
        raise SequenceFormatError(f"{img_dir} contains no image files")

    name = root.name
    attributes: tuple[str, ...] = ()
    meta_file = root / "meta.json"
    if meta_file.exists():
        try:
            meta = json.loads(meta_file.read_text())
        except json.JSONDecodeError as exc:
            raise SequenceFormatError(f"{meta_file} is not valid JSON") from exc
        name = meta.get("name", name)
        attributes = tuple(meta.get("attributes", ()))
        start = int(meta.get("start_frame", 1))     # 1-indexed, inclusive
        end = meta.get("end_frame")                 # 1-indexed, inclusive
        end = len(frame_paths) if end is None else int(end)
        if not 1 <= start <= end <= len(frame_paths):
            raise SequenceFormatError(
                f"{meta_file}: frame range [{start}, {end}] outside 1..{len(frame_paths)}")
        frame_paths = frame_paths[start - 1:end]
        boxes = boxes[start - 1:end] if len(boxes) >= end else boxes

    return Sequence(name=name, ground_truth=boxes, frame_paths=frame_paths,
                    attributes=attributes)


def find_sequences(root: str | Path) -> list[Path]:
    """Sequence directories under root (root itself counts if it is one)."""
    root = Path(root)
    if any(root.glob("groundtruth_rect*.txt")):
        return [root]
    found = sorted({p.parent for p in root.glob("*/groundtruth_rect*.txt")})
    if not found:
        raise SequenceFormatError(f"no sequences found under {root}")
    return found


# ----------------------------------------------------------------- synthetic

def _block_texture(rng: np.random.Generator, width: int, height: int,
                   block: int = 4, low: int = 0, high: int = 256) -> np.ndarray:
    gw = -(-width // block)
    gh = -(-height // block)
    colors = rng.integers(low, high, size=(gh, gw, 3), dtype=np.int64)
    return np.repeat(np.repeat(colors, block, 0), block, 1)[:height, :width].astype(np.uint8)


def _shuffled_copy(rng: np.random.Generator, texture: np.ndarray,
                   fraction: float, block: int = 4) -> np.ndarray:
    """Copy with a fraction of blocks permuted: similar but distinguishable."""
    out = texture.copy()
    gh, gw = texture.shape[0] // block, texture.shape[1] // block
    cells = [(r, c) for r in range(gh) for c in range(gw)]
    k = max(2, int(round(fraction * len(cells))))
    picked = [cells[i] for i in rng.choice(len(cells), size=k, replace=False)]
    order = rng.permutation(k)
    for (r, c), j in zip(picked, order):
        r2, c2 = picked[j]
        sl = np.s_[r * block:(r + 1) * block, c * block:(c + 1) * block]
        sl2 = np.s_[r2 * block:(r2 + 1) * block, c2 * block:(c2 + 1) * block]
        out[sl] = texture[sl2]
    return out


def _paste(frame: np.ndarray, sprite: np.ndarray, x: float, y: float):
    """Draw sprite with its top-left at (x, y), clipped to the frame."""
    h, w = sprite.shape[:2]
    x0, y0 = int(round(x)), int(round(y))
    fx0, fy0 = max(x0, 0), max(y0, 0)
    fx1, fy1 = min(x0 + w, frame.shape[1]), min(y0 + h, frame.shape[0])
    if fx1 <= fx0 or fy1 <= fy0:
        return
    frame[fy0:fy1, fx0:fx1] = sprite[fy0 - y0:fy1 - y0, fx0 - x0:fx1 - x0]


def synthesize_sequence(kind: str, seed: int = 0,
                        num_frames: int | None = None) -> Sequence:
    """Deterministic in-memory test sequences with known ground truth."""
    if kind not in SYNTH_KINDS:
        raise SequenceFormatError(f"unknown synthetic kind {kind!r}; "
                                  f"choose from {SYNTH_KINDS}")
    rng = np.random.default_rng(seed + 1000 * SYNTH_KINDS.index(kind))
    fw, fh = 320, 240
    background = _block_texture(rng, fw, fh, block=8, low=40, high=90)
    target = _block_texture(rng, 32, 32, block=4, low=0, high=256)
    frames: list[np.ndarray] = []
    boxes: list[tuple[float, float, float, float]] = []

    if kind == "translate":
        n = num_frames or 100
        x0, y0 = 20.0, 104.0
        for t in range(n):
            frame = background.copy()
            x = x0 + 2.0 * t
            _paste(frame, target, x, y0)
            frames.append(frame)
            boxes.append((x, y0, 32.0, 32.0))

    elif kind == "scale_ramp":
        n = num_frames or 50
        factor = 1.02
        base = 32.0
        max_side = int(np.ceil(base * factor ** (n - 1)))
        master = _block_texture(rng, max_side, max_side, block=8, low=0, high=256)
        cx, cy = fw / 2.0, fh / 2.0
        for t in range(n):
            size = base * factor ** t
            side = max(1, int(round(size)))
            sprite = cv2.resize(master, (side, side), interpolation=cv2.INTER_AREA)
            frame = background.copy()
            _paste(frame, sprite, cx - side / 2.0, cy - side / 2.0)
            frames.append(frame)
            boxes.append((cx - size / 2.0, cy - size / 2.0, size, size))

    elif kind == "occlude":
        n = num_frames or 100
        x0, y0 = 60.0, 104.0
        blackout = range(30, 40)
        dwell_until = 42  # target pauses briefly after reappearing, then runs
        for t in range(n):
            frame = background.copy()
            x = x0 if t < dwell_until else x0 + 3.0 * (t - dwell_until + 1)
            _paste(frame, target, x, y0)
            if t in blackout:
                _paste(frame, np.zeros((32, 32, 3), np.uint8), x, y0)
            frames.append(frame)
            boxes.append((x, y0, 32.0, 32.0))

    elif kind == "distractor":
        n = num_frames or 100
        t_jump = 50
        y0 = 60.0
        jump = 20.0
        decoy = _shuffled_copy(rng, target, fraction=0.05, block=4)
        for t in range(n):
            frame = background.copy()
            x_nominal = 40.0 + 2.0 * t
            if t < t_jump:
                x_target, y_target = x_nominal, y0
                x_decoy, y_decoy = x_nominal, 170.0
            else:
                x_target, y_target = x_nominal + jump, y0
                x_decoy, y_decoy = x_nominal, y0 + float(t - t_jump)
            _paste(frame, decoy, x_decoy, y_decoy)
            _paste(frame, target, x_target, y_target)
            frames.append(frame)
            boxes.append((x_target, y_target, 32.0, 32.0))

    name = f"synth-{kind}-{seed}"
    return Sequence(name=name, ground_truth=np.asarray(boxes), frames=frames)


def write_synthetic(sequence: Sequence, out_dir: str | Path) -> Path:
    """Materialize an in-memory sequence as an OTB-style directory (PNG frames)."""
    out = Path(out_dir)
    img_dir = out / "img"
    img_dir.mkdir(parents=True, exist_ok=True)
    for i in range(sequence.n_frames):
        bgr = cv2.cvtColor(sequence.frame(i), cv2.COLOR_RGB2BGR)
        cv2.imwrite(str(img_dir / f"{i + 1:04d}.png"), bgr)
    lines = []
    for x, y, w, h in sequence.ground_truth[:sequence.n_frames]:
        lines.append(f"{x + 1.0:.4f},{y + 1.0:.4f},{w:.4f},{h:.4f}")
    (out / "groundtruth_rect.txt").write_text("\n".join(lines) + "\n")
    (out / "meta.json").write_text(json.dumps({"name": sequence.name}) + "\n")
    return out


# ---------------------------------------------------------------- result log

def result_to_dict(result) -> dict:
    if isinstance(result, dict):
        record = dict(result)
    else:
        record = {
            "frame_index": result.frame_index,
            "box": [float(v) for v in result.box],
            "f_max": float(result.f_max),
            "primary_f_max": float(result.primary_f_max),
            "apce": float(result.apce),
            "updated": bool(result.updated),
            "peaks_considered": int(result.peaks_considered),
            "latency_ms": float(result.latency_ms),
            "scale": float(result.scale),
            "failed": bool(result.failed),
        }
    return record


def write_results(path: str | Path, sequence_name: str, config: dict,
                  results: list) -> None:
    """Line-delimited JSON: a version header, then one record per frame."""
    header = {"format": LOG_FORMAT, "sequence": sequence_name, "config": config}
    lines = [json.dumps(header, sort_keys=True, allow_nan=False)]
    for result in results:
        lines.append(json.dumps(result_to_dict(result), sort_keys=True,
                                allow_nan=False))
    Path(path).write_text("\n".join(lines) + "\n")


def read_results(path: str | Path) -> tuple[dict, list[dict]]:
    text = Path(path).read_text()
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ResultLogError(f"{path} is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ResultLogError(f"{path}: header line is not valid JSON") from exc
    if not isinstance(header, dict) or header.get("format") != LOG_FORMAT:
        raise ResultLogError(
            f"{path}: expected format {LOG_FORMAT!r}, got {header.get('format')!r}"
            if isinstance(header, dict) else f"{path}: header must be an object")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ResultLogError(f"{path}:{lineno}: corrupt record") from exc
        if not isinstance(record, dict) or "box" in record and len(record["box"]) != 4:
            raise ResultLogError(f"{path}:{lineno}: malformed record")
        records.append(record)
    return header, records


def results_boxes(records: list[dict]) -> np.ndarray:
    return np.asarray([record["box"] for record in records], dtype=np.float64)
