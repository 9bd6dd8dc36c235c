"""Exception types shared across the tracking library."""


class TrackingError(Exception):
    """Base class for all library errors."""


class DegenerateInputError(TrackingError, ValueError):
    """Input too small or otherwise unusable (e.g. patch smaller than one cell)."""


class InputError(TrackingError, ValueError):
    """Malformed caller input (bad box, frame size mismatch, bad arguments)."""


class FormatError(TrackingError, ValueError):
    """A binary or text file does not follow its documented layout."""


class ResourceError(TrackingError, RuntimeError):
    """A required data asset is missing or corrupt."""


class NumericalError(TrackingError, ArithmeticError):
    """A numerically singular or non-finite intermediate was encountered."""


class NoModelError(TrackingError, RuntimeError):
    """An operation needs a trained model that does not exist yet."""


class NoEstimateError(TrackingError, RuntimeError):
    """No estimate can be produced (e.g. empty mixture, all scale levels skipped)."""
