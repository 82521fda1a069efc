"""Evaluation metrics: center error, overlap, precision/success curves."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

PRECISION_THRESHOLDS = np.arange(51, dtype=np.float64)          # 0..50 px
SUCCESS_THRESHOLDS = np.linspace(0.0, 1.0, 21)                  # 0, 0.05, .. 1
PRECISION_REF_PX = 20.0


def _check_boxes(predicted: np.ndarray, truth: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    predicted = np.asarray(predicted, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if predicted.shape != truth.shape or predicted.ndim != 2 or predicted.shape[1] != 4:
        raise InvalidInputError(
            f"box arrays must both be (N, 4), got {predicted.shape} vs {truth.shape}")
    return predicted, truth


def center_errors(predicted: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Euclidean distance between box centers, per frame."""
    predicted, truth = _check_boxes(predicted, truth)
    pc = predicted[:, :2] + predicted[:, 2:] / 2.0
    tc = truth[:, :2] + truth[:, 2:] / 2.0
    return np.hypot(pc[:, 0] - tc[:, 0], pc[:, 1] - tc[:, 1])


def overlaps(predicted: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Intersection-over-union per frame; degenerate boxes score 0."""
    predicted, truth = _check_boxes(predicted, truth)
    x1 = np.maximum(predicted[:, 0], truth[:, 0])
    y1 = np.maximum(predicted[:, 1], truth[:, 1])
    x2 = np.minimum(predicted[:, 0] + predicted[:, 2], truth[:, 0] + truth[:, 2])
    y2 = np.minimum(predicted[:, 1] + predicted[:, 3], truth[:, 1] + truth[:, 3])
    inter = np.clip(x2 - x1, 0.0, None) * np.clip(y2 - y1, 0.0, None)
    area_p = np.clip(predicted[:, 2], 0.0, None) * np.clip(predicted[:, 3], 0.0, None)
    area_t = np.clip(truth[:, 2], 0.0, None) * np.clip(truth[:, 3], 0.0, None)
    union = area_p + area_t - inter
    out = np.zeros(len(predicted))
    good = union > 0
    out[good] = inter[good] / union[good]
    return out


def precision_curve(errors: np.ndarray) -> np.ndarray:
    """Fraction of frames with center error <= t, for t in 0..50 px."""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.size == 0:
        raise InvalidInputError("precision curve needs at least one frame")
    return (errors[None, :] <= PRECISION_THRESHOLDS[:, None]).mean(axis=1)


def success_curve(ious: np.ndarray) -> np.ndarray:
    """Fraction of frames with overlap strictly above t, for t in 0, 0.05, .. 1."""
    ious = np.asarray(ious, dtype=np.float64)
    if ious.size == 0:
        raise InvalidInputError("success curve needs at least one frame")
    return (ious[None, :] > SUCCESS_THRESHOLDS[:, None]).mean(axis=1)


@dataclass(frozen=True)
class SequenceScore:
    name: str
    n_frames: int
    precision: np.ndarray       # 51 values
    success: np.ndarray         # 21 values
    mean_center_error: float
    mean_overlap: float

    @property
    def precision_at_20(self) -> float:
        return float(self.precision[int(PRECISION_REF_PX)])

    @property
    def auc(self) -> float:
        return float(self.success.mean())


def score_sequence(name: str, predicted: np.ndarray, truth: np.ndarray) -> SequenceScore:
    errors = center_errors(predicted, truth)
    ious = overlaps(predicted, truth)
    return SequenceScore(name=name, n_frames=len(errors),
                         precision=precision_curve(errors),
                         success=success_curve(ious),
                         mean_center_error=float(errors.mean()),
                         mean_overlap=float(ious.mean()))


@dataclass(frozen=True)
class BenchmarkReport:
    scores: tuple[SequenceScore, ...]
    precision: np.ndarray       # sequence-averaged, 51 values
    success: np.ndarray         # sequence-averaged, 21 values

    @property
    def precision_at_20(self) -> float:
        return float(self.precision[int(PRECISION_REF_PX)])

    @property
    def auc(self) -> float:
        return float(self.success.mean())


def aggregate(scores: list[SequenceScore]) -> BenchmarkReport:
    """Average curves with equal weight per sequence, not per frame."""
    if not scores:
        raise InvalidInputError("no sequence scores to aggregate")
    precision = np.mean([s.precision for s in scores], axis=0)
    success = np.mean([s.success for s in scores], axis=0)
    return BenchmarkReport(scores=tuple(scores), precision=precision, success=success)


def report_text(report: BenchmarkReport) -> str:
    out = io.StringIO()
    width = max([len(s.name) for s in report.scores] + [len("sequence")])
    header = (f"{'sequence':<{width}}  frames  prec@20  auc    "
              f"mean_ce  mean_iou")
    out.write(header + "\n")
    out.write("-" * len(header) + "\n")
    for s in report.scores:
        out.write(f"{s.name:<{width}}  {s.n_frames:>6d}  {s.precision_at_20:>7.3f}  "
                  f"{s.auc:.3f}  {s.mean_center_error:>7.2f}  {s.mean_overlap:>8.3f}\n")
    out.write("-" * len(header) + "\n")
    out.write(f"{'overall':<{width}}  {sum(s.n_frames for s in report.scores):>6d}  "
              f"{report.precision_at_20:>7.3f}  {report.auc:.3f}\n")
    return out.getvalue()


def report_csv(report: BenchmarkReport) -> str:
    lines = ["sequence,frames,precision_at_20,auc,mean_center_error,mean_overlap"]
    for s in report.scores:
        lines.append(f"{s.name},{s.n_frames},{s.precision_at_20:.6f},{s.auc:.6f},"
                     f"{s.mean_center_error:.6f},{s.mean_overlap:.6f}")
    lines.append(f"overall,{sum(s.n_frames for s in report.scores)},"
                 f"{report.precision_at_20:.6f},{report.auc:.6f},,")
    return "\n".join(lines) + "\n"
