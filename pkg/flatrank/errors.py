"""
Exception types shared by the flattening toolkit.

Every error raised on purpose derives from FlatrankError so the CLI can turn it
into a clean exit code instead of a traceback.
"""


class FlatrankError(Exception):
    """Base class for all toolkit errors."""

    pass


class ArgumentError(FlatrankError, ValueError):
    """Raised when an operation receives an argument outside its domain."""

    pass


class ShapeError(FlatrankError):
    """Raised when tensor/matrix dimensions or fields do not agree."""

    pass


class BoundsError(FlatrankError, IndexError):
    """Raised when an index lies outside the declared dimensions."""

    pass


class CapacityError(FlatrankError):
    """Raised when a computation would exceed a configured size cap."""

    pass


class FormatError(FlatrankError):
    """Raised when a value cannot be written in an interchange format."""

    pass


class ParseError(FlatrankError):
    """Raised when an interchange file is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
