"""
Logistic-loss core shared by all predictors
"""

from .logistic import (
    LabeledExample,
    LabeledSequence,
    ParamVector,
    RegretTrace,
    as_sequence,
    cumulative_loss,
    example_loss,
    label_probability,
    log_likelihood_matrix,
    logistic_loss,
    per_round_losses,
)
from .online import OnlineAlgorithm

__all__ = [
    "LabeledExample",
    "LabeledSequence",
    "ParamVector",
    "RegretTrace",
    "OnlineAlgorithm",
    "as_sequence",
    "cumulative_loss",
    "example_loss",
    "label_probability",
    "log_likelihood_matrix",
    "logistic_loss",
    "per_round_losses",
]
