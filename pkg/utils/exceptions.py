"""Custom exceptions for the dilute Bose gas toolkit."""
from typing import Optional


class BoseGasError(Exception):
    """Base exception class for the toolkit."""
    exit_code = 1


class ValidationError(BoseGasError):
    """Error raised when input validation fails."""
    exit_code = 2


class DomainError(ValidationError):
    """Error raised when an input violates a precondition or lies outside the domain."""
    pass


class SetupError(ValidationError):
    """Error raised when no valid starting state can be built."""
    pass


class ConfigurationError(BoseGasError):
    """Error raised when there's a configuration issue."""
    exit_code = 2


class SolverError(BoseGasError):
    """Error raised when a numerical solver fails to converge."""
    exit_code = 3


class AccuracyError(SolverError):
    """Error raised when a truncation or sample size cannot meet the tolerance."""

    def __init__(self, message: str, required: Optional[float] = None):
        super().__init__(message)
        self.required = required


class ResourceError(BoseGasError):
    """Error raised when a computation would exceed a resource guard."""
    exit_code = 4

    def __init__(self, message: str, estimate: Optional[int] = None):
        super().__init__(message)
        self.estimate = estimate


class ServiceError(BoseGasError):
    """Base exception for service-related errors."""
    pass
