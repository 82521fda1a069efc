"""margintrack: real-time single-object tracking with confidence-gated updates."""

from .benchmark import (aggregate, center_errors, overlaps, precision_curve,
                        score_sequence, success_curve)
from .dataset import (Sequence, load_sequence, read_results,
                      synthesize_sequence, write_results)
from .errors import (DegenerateResponseError, InvalidInputError,
                     NumericalError, ResultLogError, SequenceFormatError,
                     TrackingError)
from .runner import bench_run, run_and_log, track_sequence
from .selftest import run_selftest
from .tracker import FrameResult, Tracker, TrackerConfig

__version__ = "0.1.0"

__all__ = [
    "DegenerateResponseError",
    "FrameResult",
    "InvalidInputError",
    "NumericalError",
    "ResultLogError",
    "Sequence",
    "SequenceFormatError",
    "Tracker",
    "TrackerConfig",
    "TrackingError",
    "aggregate",
    "bench_run",
    "center_errors",
    "load_sequence",
    "overlaps",
    "precision_curve",
    "read_results",
    "run_and_log",
    "run_selftest",
    "score_sequence",
    "success_curve",
    "synthesize_sequence",
    "track_sequence",
    "write_results",
    "__version__",
]
