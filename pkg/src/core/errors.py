# src/core/errors.py
"""Exception hierarchy shared by every package. Each class carries the CLI exit code."""
from typing import Any, Dict, Optional


class SimulatorError(Exception):
    """Base class for all errors raised by the simulator."""
    exit_code = 1


class DomainError(SimulatorError, ValueError):
    """Numeric input outside the domain of an operation."""
    exit_code = 2


class DegenerateSettingsError(DomainError):
    """A measurement direction collapsed to the zero vector."""


class ConfigError(SimulatorError):
    """Inconsistent or unknown configuration."""
    exit_code = 2

    def __init__(self, message: str, messages: Optional[list] = None):
        super().__init__(message)
        self.messages = list(messages) if messages else [message]


class InsufficientDataError(SimulatorError):
    exit_code = 3


class NumericError(SimulatorError):
    """Solver, fit or optimizer failure. `diagnostics` holds whatever the caller knew."""
    exit_code = 3

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class CalibrationError(NumericError):
    pass


class OutputError(SimulatorError):
    exit_code = 4
