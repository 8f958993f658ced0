"""
Validation modules for workbench artifacts
"""

from .artifact_validator import ArtifactValidator, ValidationResult

__all__ = ["ArtifactValidator", "ValidationResult"]
