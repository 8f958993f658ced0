"""
Regretlab Package
Online logistic regression regret workbench: mixture predictors, baselines,
adversarial lower-bound experiments and closed-form regret bounds
"""

__version__ = "0.1.0"

from .workbench import RegretWorkbench
from .parsers import ExampleCSVParser
from .formatters import ArtifactWriter
from .validators import ArtifactValidator

__all__ = [
    "RegretWorkbench",
    "ExampleCSVParser",
    "ArtifactWriter",
    "ArtifactValidator",
]
