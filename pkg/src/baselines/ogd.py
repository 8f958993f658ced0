"""
Projected online gradient descent on the per-round logistic loss
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.special import expit

from comparators.projection import NormConstraint, project_array
from comparators.solver import best_comparator
from core.logistic import (
    ParamVector,
    RegretTrace,
    SequenceLike,
    as_sequence,
    logistic_loss,
    per_round_losses,
)

VALID_SCHEDULES = ('constant', 'inv_sqrt')


@dataclass(frozen=True)
class LearningRateSchedule:
    """
    Step size eta_t for round t (1-based).

    constant : eta_t = base_rate
    inv_sqrt : eta_t = base_rate / sqrt(t)
    """

    kind: str = 'inv_sqrt'
    base_rate: float = 1.0

    def __post_init__(self):
        if self.kind not in VALID_SCHEDULES:
            raise ValueError(
                f"Unknown learning-rate schedule {self.kind!r}; expected one of {VALID_SCHEDULES}"
            )
        if not self.base_rate >= 0 or not math.isfinite(self.base_rate):
            raise ValueError(f"Base learning rate must be nonnegative, got {self.base_rate}")

    def __call__(self, t: int) -> float:
        if self.kind == 'constant':
            return self.base_rate
        return self.base_rate / math.sqrt(t)


class OnlineGradientDescent:
    """
    Predict with theta_t, pay the logistic loss, then take a projected step.

    The iterate before every round is kept in `iterates` after a run.
    """

    name = 'ogd'

    def __init__(
        self,
        constraint: NormConstraint,
        schedule: Optional[LearningRateSchedule] = None,
    ):
        self.constraint = constraint
        self.schedule = schedule or LearningRateSchedule()
        self.iterates: List[ParamVector] = []
        self.logger = logging.getLogger(__name__)

    def run(self, sequence: SequenceLike, comparator: Optional[ParamVector] = None) -> RegretTrace:
        sequence = as_sequence(sequence)
        T = len(sequence)
        d = sequence.dimension

        theta = np.zeros(d)
        alg_loss = np.empty(T)
        self.iterates = []
        for t in range(T):
            self.iterates.append(ParamVector(theta))
            x, y = sequence.features[t], float(sequence.labels[t])
            margin = y * float(x @ theta)
            alg_loss[t] = float(logistic_loss(margin))
            gradient = -y * float(expit(-margin)) * x
            theta = project_array(theta - self.schedule(t + 1) * gradient, self.constraint)
        self.iterates.append(ParamVector(theta))

        if comparator is None:
            comparator = (
                best_comparator(sequence, self.constraint).theta_star if T else ParamVector.zeros(d)
            )
        self.logger.debug(f"OGD finished {T} rounds on {self.constraint}")
        return RegretTrace(alg_loss, per_round_losses(comparator, sequence), comparator=comparator)


def ogd_run(
    sequence: SequenceLike,
    constraint: NormConstraint,
    learning_rate_schedule: Optional[LearningRateSchedule] = None,
) -> RegretTrace:
    """
    Projected online gradient descent scored against the best comparator.

    Args:
        sequence: Labeled examples
        constraint: Ball for iterates and comparator
        learning_rate_schedule: Step sizes (default 1/sqrt(t))

    Returns:
        RegretTrace
    """
    return OnlineGradientDescent(constraint, learning_rate_schedule).run(sequence)
