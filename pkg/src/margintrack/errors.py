"""Exception types shared across the tracking library."""


class TrackingError(Exception):
    """Base class for all library errors."""


class InvalidInputError(TrackingError):
    """Malformed caller input: bad shapes, empty boxes, out-of-range params."""


class NumericalError(TrackingError):
    """Numerical degeneracy: near-zero denominators, non-finite intermediates."""


class DegenerateResponseError(NumericalError):
    """Response map is exactly constant, so peak sharpness is undefined."""


class SequenceFormatError(TrackingError):
    """A sequence directory or annotation file does not follow the expected layout."""


class ResultLogError(TrackingError):
    """A result log file is corrupted or has an unsupported format version."""
