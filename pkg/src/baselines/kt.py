"""
Krichevsky-Trofimov (add-1/2) sequential Bernoulli predictor
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln, logit

from core.logistic import (
    LabeledSequence,
    ParamVector,
    RegretTrace,
    SequenceLike,
    as_sequence,
    per_round_losses,
)
from utils.errors import FeatureBoundError

_LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class KtState:
    """Sufficient statistics: number of +1 labels and of all labels seen."""

    count_pos: int = 0
    count_total: int = 0

    def __post_init__(self):
        if not 0 <= self.count_pos <= self.count_total:
            raise ValueError(
                f"Need 0 <= count_pos <= count_total, got ({self.count_pos}, {self.count_total})"
            )

    def update(self, label: int) -> 'KtState':
        return KtState(self.count_pos + (label == 1), self.count_total + 1)


def kt_predict(state: KtState) -> float:
    """Probability of +1: (count_pos + 1/2) / (count_total + 1)."""
    return (state.count_pos + 0.5) / (state.count_total + 1.0)


def kt_sequence_loss(count_pos, count_total):
    """
    Code length of any sequence with the given counts under KT.

    -ln [Gamma(a + 1/2) Gamma(b + 1/2) / (pi Gamma(T + 1))] with a = count_pos,
    b = count_total - count_pos. Works elementwise on arrays.
    """
    a = np.asarray(count_pos, dtype=float)
    total = np.asarray(count_total, dtype=float)
    return -(gammaln(a + 0.5) + gammaln(total - a + 0.5) - _LOG_PI - gammaln(total + 1.0))


def _check_labels(labels) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise FeatureBoundError("Labels must form a one-dimensional sequence")
    if labels.size and not np.all(np.isin(labels, (-1, 1))):
        raise FeatureBoundError("Labels must be -1 or +1")
    return labels.astype(np.int64)


def kt_run(labels: Sequence[int]) -> RegretTrace:
    """
    Sequential KT predictions scored against the empirical-rate comparator.

    The comparator is the best fixed Bernoulli parameter in hindsight,
    p_hat = count_pos / T. Cumulative regret is computed from the closed-form
    block code length, so the final value depends only on the counts.

    Args:
        labels: Sequence of -1/+1 labels (features are taken as x = 1)

    Returns:
        RegretTrace; comparator is logit(p_hat), or None when p_hat is 0 or 1
    """
    labels = _check_labels(labels)
    T = labels.size
    if T == 0:
        return RegretTrace(np.zeros(0), np.zeros(0), comparator=None)

    positives = np.cumsum(labels == 1)
    rounds = np.arange(1, T + 1)

    state = KtState()
    alg_loss = np.empty(T)
    for t, label in enumerate(labels):
        p_plus = kt_predict(state)
        alg_loss[t] = -math.log(p_plus if label == 1 else 1.0 - p_plus)
        state = state.update(int(label))

    count_pos = int(positives[-1])
    rate = count_pos / T
    loss_plus = -math.log(rate) if count_pos > 0 else 0.0
    loss_minus = -math.log1p(-rate) if count_pos < T else 0.0
    comparator_loss = np.where(labels == 1, loss_plus, loss_minus)

    cumulative = kt_sequence_loss(positives, rounds) - (
        positives * loss_plus + (rounds - positives) * loss_minus
    )
    comparator = ParamVector([logit(rate)]) if 0 < count_pos < T else None
    return RegretTrace(alg_loss, comparator_loss, cumulative, comparator=comparator)


class KtPredictor:
    """
    KT predictor behind the OnlineAlgorithm interface (d = 1, x = 1).

    Without an explicit comparator regret is measured against the
    empirical-rate comparator; with one, against that logistic parameter.
    """

    name = 'kt'

    def run(self, sequence: SequenceLike, comparator: Optional[ParamVector] = None) -> RegretTrace:
        sequence = as_sequence(sequence)
        if len(sequence) and (sequence.dimension != 1 or not np.all(sequence.features == 1.0)):
            raise FeatureBoundError("KT predictor requires one-dimensional features equal to 1")

        trace = kt_run(sequence.labels)
        if comparator is None:
            return trace
        ones = LabeledSequence(np.ones((len(sequence), 1)), sequence.labels)
        return RegretTrace(
            trace.per_round_alg_loss,
            per_round_losses(comparator, ones),
            comparator=comparator,
        )
