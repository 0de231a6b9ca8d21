"""Exception hierarchy shared across the package."""

from __future__ import annotations


class KfSearchError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(KfSearchError):
    """An argument violates a documented precondition."""


class ConfigError(KfSearchError):
    """A configuration value, config file, or fixture file is invalid."""


class SrtParseError(KfSearchError):
    """Subtitle file could not be parsed.

    ``line`` is the 1-based line number in the source text where the
    offending content sits.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class BackendError(KfSearchError):
    """A detector/encoder/planner backend failed or broke protocol."""


class SearchError(KfSearchError):
    """Search aborted mid-run. Carries whatever trace was collected."""

    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = trace if trace is not None else []
