"""
Error types for the chain-of-loops pencil toolkit.
Each error also derives from the builtin callers would naturally catch.
"""

from typing import Optional


class PencilError(Exception):
    """Base class for every error raised by the toolkit."""


class InvalidParameterError(PencilError, ValueError):
    """A numeric parameter (genus, length, degree, ...) is out of range."""


class InvalidGranularityError(InvalidParameterError):
    """The requested grid granularity does not divide some edge length."""


class InvalidInputError(PencilError, ValueError):
    """Malformed graph, divisor or function input."""


class InvalidSupportError(PencilError, ValueError):
    """A divisor has chips away from the grid of the refined graph."""


class InvalidFunctionError(PencilError, ValueError):
    """A piecewise-linear function has a non-integer slope."""


class PrecisionError(PencilError, ArithmeticError):
    """No grid point satisfies a required condition at maximum refinement."""


class UnsupportedGraphError(PencilError):
    """The graph lacks the structure an operation needs (e.g. symmetry)."""


class CertificationError(PencilError):
    """An internal certificate failed; this would contradict a proven claim."""


class ParseError(PencilError, ValueError):
    """Text input could not be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
