"""
Regret bound calculator
"""

from .calculator import (
    TABLE_ROWS,
    BoundQuery,
    BoundReport,
    GaussianPriorChoice,
    binary_entropy,
    classify_region,
    evaluate,
    fano_error_bound,
    gamma_effective,
    gaussian_mixture_bound,
    gaussian_prior_variance,
    instance_bound_at_default_spacing,
    l1_dense_bound,
    l1_grid_cardinality_bound,
    l1_optimal_spacing,
    lower_bound,
    lower_in_region,
    multilabel_lower_bound,
    pe_upper,
    scaled_grid_log_cardinality,
    theorem2_instance_bound,
    to_bits,
    upper_bound,
)

__all__ = [
    "TABLE_ROWS",
    "BoundQuery",
    "BoundReport",
    "GaussianPriorChoice",
    "binary_entropy",
    "classify_region",
    "evaluate",
    "fano_error_bound",
    "gamma_effective",
    "gaussian_mixture_bound",
    "gaussian_prior_variance",
    "instance_bound_at_default_spacing",
    "l1_dense_bound",
    "l1_grid_cardinality_bound",
    "l1_optimal_spacing",
    "lower_bound",
    "lower_in_region",
    "multilabel_lower_bound",
    "pe_upper",
    "scaled_grid_log_cardinality",
    "theorem2_instance_bound",
    "to_bits",
    "upper_bound",
]
