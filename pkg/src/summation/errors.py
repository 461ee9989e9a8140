"""Exception types shared across the package.

Unreadable paths surface as the built-in ``OSError`` family; everything the
pipeline can reject on its own terms gets a named exception below.
"""


class SummationError(Exception):
    """Base class for all package-specific errors."""


class FormatError(SummationError):
    """A structured input file violates its schema."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateIdError(SummationError):
    """Two documents in one corpus share an id."""


class DimMismatchError(SummationError):
    """Vectors of different dimensionality were combined."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message)


class EmptyStoreError(SummationError):
    """A vector file contained no usable entries."""


class InsufficientDataError(SummationError):
    """Not enough training material for the embedding trainer."""


class TooFewPointsError(SummationError):
    """Fewer points than requested clusters."""


class EmptyInputError(SummationError):
    """An operation that needs at least one element got none."""


class SchemaMismatchError(SummationError):
    """Feature schemas of a model and a feature provider disagree."""


class UnknownSetSizeError(SummationError):
    """Feature set size outside the supported {2, 5, 8, 10}."""


class IllegalActionError(SummationError):
    """An MDP action that is not legal in the current state."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class TooLargeError(SummationError):
    """Exhaustive enumeration refused to run on an oversized instance."""
