"""
Utility modules
"""

from .config import Config, ExperimentConfig
from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    FeatureBoundError,
    GridSizeError,
    InfeasibleDesignError,
    RegretLabError,
    error_record,
)
from .logger import ProgressLogger, log_execution_time, setup_logger
from .seeding import make_rng, trial_rng

__all__ = [
    "Config",
    "ExperimentConfig",
    "ConfigurationError",
    "DimensionMismatchError",
    "FeatureBoundError",
    "GridSizeError",
    "InfeasibleDesignError",
    "RegretLabError",
    "error_record",
    "ProgressLogger",
    "log_execution_time",
    "setup_logger",
    "make_rng",
    "trial_rng",
]
