"""
Error types raised across the workbench
"""

from typing import Any, Dict, Optional


class RegretLabError(ValueError):
    """Base class for invalid inputs; carries a machine-readable record."""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.context = context

    def to_record(self) -> Dict[str, Any]:
        """
        Build the error record emitted by the CLI on failure.

        Returns:
            Dictionary with status, error type, message and context fields
        """
        record: Dict[str, Any] = {
            'status': 'error',
            'error_type': self.__class__.__name__,
            'message': str(self),
        }
        record.update(self.context)
        return record


class DimensionMismatchError(RegretLabError):
    """Feature and parameter dimensions disagree."""


class FeatureBoundError(RegretLabError):
    """A feature coordinate lies outside [-1, 1] or a label is not +/-1."""


class GridSizeError(RegretLabError):
    """The requested grid exceeds the configured cardinality cap."""

    def __init__(self, requested: int, cap: int, message: Optional[str] = None):
        message = message or (
            f"Grid cardinality {requested} exceeds the cap of {cap} points"
        )
        super().__init__(message, requested=int(requested), cap=int(cap))
        self.requested = int(requested)
        self.cap = int(cap)


class InfeasibleDesignError(RegretLabError):
    """The horizon is too short for the requested construction."""


class ConfigurationError(RegretLabError):
    """Experiment configuration is invalid or inconsistent."""


def error_record(exc: BaseException) -> Dict[str, Any]:
    """
    Convert any exception into an error record.

    Args:
        exc: Raised exception

    Returns:
        Machine-readable error dictionary
    """
    if isinstance(exc, RegretLabError):
        return exc.to_record()
    return {
        'status': 'error',
        'error_type': exc.__class__.__name__,
        'message': str(exc),
    }
