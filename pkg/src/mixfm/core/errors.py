"""Exception hierarchy and process exit codes."""

from typing import Optional


EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3


class MixFMError(Exception):
    """Base class for all mixfm errors."""
    exit_code = EXIT_VALIDATION


class ValidationError(MixFMError, ValueError):
    """Input data or arguments violate a precondition."""
    exit_code = EXIT_VALIDATION


class ParseError(ValidationError):
    """Malformed sparse text, schema or config input.

    Carries the source name and the 1-based line and column of the offending
    token when they are known.
    """

    def __init__(self, message: str, source: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        self.source = source
        self.line = line
        self.column = column
        super().__init__(message)

    def __str__(self) -> str:
        message = super().__str__()
        location = []
        if self.source:
            location.append(str(self.source))
        if self.line is not None:
            location.append(f"line {self.line}")
        if self.column is not None:
            location.append(f"column {self.column}")
        if location:
            return f"{', '.join(location)}: {message}"
        return message

    def at(self, source: Optional[str] = None, line: Optional[int] = None) -> 'ParseError':
        """Return a copy with source/line filled in where missing."""
        return ParseError(
            super().__str__(),
            source=self.source or source,
            line=self.line if self.line is not None else line,
            column=self.column,
        )


class DataIOError(MixFMError, OSError):
    """A dataset, schema or checkpoint file cannot be read or written."""
    exit_code = EXIT_IO


class NumericalError(MixFMError, ArithmeticError):
    """Non-finite gradients, parameters or out-of-range draws."""
    exit_code = EXIT_NUMERICAL
