"""
Discrete Bayesian mixtures over parameter grids
"""

from .grid import (
    DEFAULT_MAX_POINTS,
    ParamGrid,
    build_grid,
    default_spacing,
    grid_cardinality,
)
from .posterior import (
    BayesianMixture,
    LogPosterior,
    PriorKind,
    PriorSpec,
    init_posterior,
    mixture_predict,
    posterior_update,
    refinement_delta,
    run_online,
    sequence_probability,
    variational_certificate,
)

__all__ = [
    "DEFAULT_MAX_POINTS",
    "ParamGrid",
    "build_grid",
    "default_spacing",
    "grid_cardinality",
    "BayesianMixture",
    "LogPosterior",
    "PriorKind",
    "PriorSpec",
    "init_posterior",
    "mixture_predict",
    "posterior_update",
    "refinement_delta",
    "run_online",
    "sequence_probability",
    "variational_certificate",
]
