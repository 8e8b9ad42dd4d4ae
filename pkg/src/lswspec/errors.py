"""Exception types shared across the package.

Each class carries the process exit code used by the command line tool, so
library errors map onto distinct shell-visible failure classes.
"""
from __future__ import annotations

__all__ = [
    "LswError",
    "ConfigurationError",
    "DataError",
    "NumericalError",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_DATA",
    "EXIT_IO",
    "EXIT_NUMERICAL",
]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_IO = 4
EXIT_NUMERICAL = 5


class LswError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigurationError(LswError, ValueError):
    """A parameter, option or argument combination is invalid."""

    exit_code = EXIT_CONFIG


class DataError(LswError, ValueError):
    """Input data values are unusable (non-finite, non-positive prices, ...)."""

    exit_code = EXIT_DATA


class NumericalError(LswError, ArithmeticError):
    """A computation degenerated (e.g. non-positive innovation variance)."""

    exit_code = EXIT_NUMERICAL
