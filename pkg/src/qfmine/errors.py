"""Exception hierarchy."""

from __future__ import annotations


class QFMineError(Exception):
    """Base class for every error raised by this package."""


class ParseError(QFMineError):
    def __init__(self, message: str, span=None, expected=()):
        self.span = span
        self.expected = frozenset(expected)
        where = f"{span}: " if span is not None else ""
        extra = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{where}{message}{extra}")
        self.message = message


class ResolutionError(QFMineError):
    """A name does not resolve to a feature, variable, state or attribute."""


class EvalError(QFMineError):
    """Runtime evaluation failure (division by zero, bad effect, ...)."""


class LogFormatError(QFMineError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DecodeError(QFMineError):
    """An activity name is not a valid ``action##source##target`` encoding."""
