"""Exception types shared across the package."""


class EvmapError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EvmapError, ValueError):
    """A value violates a structural constraint (normalization, frame cap, ...)."""


class FrameMismatchError(ValidationError):
    """Two values that must share a frame of discernment do not."""


class ParseError(EvmapError):
    """A rule or evidence file failed to parse."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(self.describe())

    def describe(self) -> str:
        if self.line is None:
            return self.message
        return f"line {self.line}, column {self.col}: {self.message}"


class InferenceError(EvmapError):
    """The inference itself failed, as opposed to its inputs being malformed."""


class TotalConflictError(InferenceError):
    """Dempster combination is undefined: the sources flatly contradict."""


class ImpossibleObservationError(InferenceError):
    """Every hypothesis assigns zero likelihood to the observed evidence."""
