"""
Comparator search over norm balls
"""

from .projection import Norm, NormConstraint, project, project_array
from .solver import ComparatorResult, ComparatorSolver, best_comparator, iteration_cap

__all__ = [
    "Norm",
    "NormConstraint",
    "project",
    "project_array",
    "ComparatorResult",
    "ComparatorSolver",
    "best_comparator",
    "iteration_cap",
]
