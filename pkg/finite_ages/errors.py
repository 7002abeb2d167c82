"""Exceptions raised by finite-ages."""


class AgesError(Exception):
    """Base class for all finite-ages errors."""


class InputError(AgesError, ValueError):
    """Bad arguments, signature mismatch or violated precondition."""


class ParseError(InputError):
    """A text file could not be parsed."""

    def __init__(self, message: str, line: int, column: int = 1) -> None:
        self.line = line
        self.column = column
        super().__init__(f"regel {line}, kolom {column}: {message}")


class DecodeError(AgesError):
    """An encoding could not be decoded back."""


class DataError(AgesError):
    """Data violates the axioms of its type (e.g. the triangle inequality)."""


class ResourceLimitError(AgesError):
    """A soft size limit for exhaustive search was exceeded."""
