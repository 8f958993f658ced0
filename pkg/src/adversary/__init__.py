"""
Segmented designs, distinguishable grids and Monte Carlo lower-bound checks
"""

from .design import SegmentedDesign, build_design
from .distinguish import (
    CapacityReport,
    DistinguishabilityReport,
    capacity_experiment,
    estimate_pe,
    exact_error_probability,
    ml_identify,
    ml_identify_index,
    sample_and_label,
)
from .theory_grid import SPACING_RULES, build_theory_grid, probability_spacing

__all__ = [
    "SegmentedDesign",
    "build_design",
    "build_theory_grid",
    "probability_spacing",
    "SPACING_RULES",
    "sample_and_label",
    "ml_identify",
    "ml_identify_index",
    "estimate_pe",
    "exact_error_probability",
    "DistinguishabilityReport",
    "capacity_experiment",
    "CapacityReport",
]
