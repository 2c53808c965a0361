"""Shared exception types.

The CLI maps these onto process exit codes, so library code should raise
the most specific one that applies and let everything else propagate.
"""


class DealloyError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(DealloyError, ValueError):
    """Invalid configuration value or inconsistent combination of values."""


class DivergenceError(DealloyError, RuntimeError):
    """A solver or rollout produced non-finite or runaway values.

    Carries the step index at which the blow-up was detected.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ArchiveFormatError(DealloyError, RuntimeError):
    """A snapshot archive on disk does not match the expected layout."""
