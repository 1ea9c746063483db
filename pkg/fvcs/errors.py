"""Exception hierarchy shared by every fvcs module."""

from __future__ import annotations


class FvcsError(Exception):
    """Base class for all errors raised by fvcs."""


class ConfigError(FvcsError, ValueError):
    """Invalid physical parameters or configuration file.

    Parameters
    ----------
    field:
        Name of the offending PhysicalParams field (or config key).
    message:
        Human readable description of the violation.
    """

    def __init__(self, field: str, message: str) -> None:
        super().__init__(message)
        self.field = field


class DomainError(FvcsError, ValueError):
    """An argument lies outside the domain of an operation (e.g. a negative level)."""


class ConvergenceError(FvcsError, RuntimeError):
    """A quadrature or series did not reach its tolerance.

    The best value reached and its error estimate are kept so callers can
    still report them.
    """

    def __init__(self, message: str, value: complex | float, err_estimate: float) -> None:
        super().__init__(message)
        self.value = value
        self.err_estimate = err_estimate


class DivergenceError(ConvergenceError):
    """Series terms started growing again after they had been decreasing."""

    def __init__(
        self, message: str, index: int, value: complex | float, err_estimate: float
    ) -> None:
        super().__init__(message, value, err_estimate)
        self.index = index


class TruncationError(FvcsError, RuntimeError):
    """Fock truncation too small for the requested state."""

    def __init__(self, message: str, suggested_n_max: int) -> None:
        super().__init__(message)
        self.suggested_n_max = suggested_n_max


class GridResolutionError(FvcsError, RuntimeError):
    """A sampling grid is too coarse or too short for the requested accuracy."""
