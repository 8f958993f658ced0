"""
Logistic probabilities, per-example losses and regret accounting
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np
from scipy.special import expit

from utils.errors import DimensionMismatchError, FeatureBoundError

logger = logging.getLogger(__name__)

# Slack on regret bookkeeping: cumulative regret vs the running sum of
# per-round differences.
CUMULATIVE_ATOL = 1e-9


def _frozen_array(values, dtype=float, ndim: int = 1) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    if array.ndim != ndim:
        raise DimensionMismatchError(
            f"Expected a {ndim}-dimensional array, got shape {array.shape}"
        )
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Model parameter theta; immutable and always finite."""

    weights: np.ndarray

    def __post_init__(self):
        weights = _frozen_array(self.weights)
        if not np.all(np.isfinite(weights)):
            raise ValueError(f"Parameter vector has non-finite entries: {weights}")
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def zeros(cls, d: int) -> 'ParamVector':
        return cls(np.zeros(int(d)))

    @property
    def dimension(self) -> int:
        return int(self.weights.shape[0])

    def norm(self, order: float) -> float:
        return float(np.linalg.norm(self.weights, ord=order)) if self.dimension else 0.0

    def dot(self, features: np.ndarray) -> float:
        """Dot product z = x^T theta."""
        features = np.asarray(features, dtype=float)
        if features.shape != self.weights.shape:
            raise DimensionMismatchError(
                f"Feature dimension {features.shape[0] if features.ndim else 0} "
                f"does not match parameter dimension {self.dimension}",
                expected=self.dimension,
            )
        return float(np.dot(features, self.weights))

    def __neg__(self) -> 'ParamVector':
        return ParamVector(-self.weights)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParamVector):
            return NotImplemented
        return bool(np.array_equal(self.weights, other.weights))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"ParamVector({self.weights.tolist()})"


@dataclass(frozen=True, eq=False)
class LabeledExample:
    """One round: features in [-1, 1]^d and a label in {-1, +1}."""

    features: np.ndarray
    label: int

    def __post_init__(self):
        features = _frozen_array(self.features)
        _check_features(features)
        label = _check_label(self.label)
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'label', label)

    @property
    def dimension(self) -> int:
        return int(self.features.shape[0])


def _check_features(features: np.ndarray) -> None:
    if not np.all(np.isfinite(features)):
        raise FeatureBoundError("Feature vector has non-finite entries")
    if features.size and np.max(np.abs(features)) > 1.0:
        raise FeatureBoundError(
            f"Feature coordinates must satisfy |x_i| <= 1, "
            f"got max |x_i| = {np.max(np.abs(features))}"
        )


def _check_label(label) -> int:
    if label not in (-1, 1) or isinstance(label, bool):
        raise FeatureBoundError(f"Label must be -1 or +1, got {label!r}")
    return int(label)


class LabeledSequence:
    """
    Stacked sequence S_T: a T x d feature matrix and a length-T label vector.

    Iterating yields LabeledExample values; both arrays are read-only.
    """

    def __init__(self, features: np.ndarray, labels: np.ndarray):
        features = np.array(features, dtype=float, copy=True)
        labels = np.array(labels, copy=True)
        if features.ndim != 2:
            raise DimensionMismatchError(
                f"Features must be a T x d matrix, got shape {features.shape}"
            )
        if labels.shape != (features.shape[0],):
            raise DimensionMismatchError(
                f"Got {labels.shape[0] if labels.ndim else 0} labels "
                f"for {features.shape[0]} feature rows"
            )
        _check_features(features)
        if labels.size and not np.all(np.isin(labels, (-1, 1))):
            raise FeatureBoundError("Labels must be -1 or +1")

        self.features = features
        self.labels = labels.astype(np.int64)
        self.features.setflags(write=False)
        self.labels.setflags(write=False)

    @classmethod
    def from_examples(
        cls,
        examples: Iterable[LabeledExample],
        dimension: Optional[int] = None,
    ) -> 'LabeledSequence':
        examples = list(examples)
        if not examples:
            return cls.empty(dimension or 0)

        d = examples[0].dimension
        for example in examples:
            if example.dimension != d:
                raise DimensionMismatchError(
                    f"Inconsistent feature dimensions {d} and {example.dimension}"
                )
        if dimension is not None and dimension != d:
            raise DimensionMismatchError(
                f"Sequence dimension {d} does not match expected {dimension}"
            )
        features = np.vstack([example.features for example in examples])
        labels = np.array([example.label for example in examples])
        return cls(features, labels)

    @classmethod
    def empty(cls, dimension: int) -> 'LabeledSequence':
        return cls(np.zeros((0, int(dimension))), np.zeros(0, dtype=np.int64))

    @property
    def dimension(self) -> int:
        return int(self.features.shape[1])

    def __len__(self) -> int:
        return int(self.features.shape[0])

    def __getitem__(self, index: int) -> LabeledExample:
        return LabeledExample(self.features[index], int(self.labels[index]))

    def __iter__(self) -> Iterator[LabeledExample]:
        for index in range(len(self)):
            yield self[index]

    def subsequence(self, start: int, stop: int) -> 'LabeledSequence':
        return LabeledSequence(self.features[start:stop], self.labels[start:stop])

    def permuted(self, order: Sequence[int]) -> 'LabeledSequence':
        order = np.asarray(order)
        return LabeledSequence(self.features[order], self.labels[order])


SequenceLike = Union[LabeledSequence, Iterable[LabeledExample]]


def as_sequence(sequence: SequenceLike, dimension: Optional[int] = None) -> LabeledSequence:
    """
    Normalize any sequence of examples to a LabeledSequence.

    Args:
        sequence: LabeledSequence or iterable of LabeledExample
        dimension: Expected feature dimension (checked when given)

    Returns:
        LabeledSequence
    """
    if isinstance(sequence, LabeledSequence):
        if dimension is not None and len(sequence) and sequence.dimension != dimension:
            raise DimensionMismatchError(
                f"Sequence dimension {sequence.dimension} does not match "
                f"parameter dimension {dimension}",
                expected=dimension,
            )
        return sequence
    return LabeledSequence.from_examples(sequence, dimension)


def logistic_loss(margins) -> np.ndarray:
    """
    ln(1 + exp(-m)) elementwise for margins m = y x^T theta.

    Uses the two-branch softplus form max(-m, 0) + ln(1 + exp(-|m|)),
    which is -m + ln(1 + e^m) for m < 0 and ln(1 + e^-m) otherwise.
    """
    margins = np.asarray(margins, dtype=float)
    return np.maximum(-margins, 0.0) + np.log1p(np.exp(-np.abs(margins)))


def _margin(theta: ParamVector, example: LabeledExample) -> float:
    return example.label * theta.dot(example.features)


def label_probability(theta: ParamVector, example: LabeledExample) -> float:
    """
    p(y | x, theta) = 1 / (1 + exp(-y x^T theta)).

    Args:
        theta: Model parameters
        example: Round features and the label whose probability is wanted

    Returns:
        Probability of example.label
    """
    return float(expit(_margin(theta, example)))


def example_loss(theta: ParamVector, example: LabeledExample) -> float:
    """Log loss -ln p(y | x, theta) in nats."""
    return float(logistic_loss(_margin(theta, example)))


def cumulative_loss(theta: ParamVector, sequence: SequenceLike) -> float:
    """
    Total log loss L(theta, S_T) over a sequence.

    Args:
        theta: Model parameters
        sequence: Labeled examples

    Returns:
        Sum of per-example losses in nats (0 for an empty sequence)
    """
    sequence = as_sequence(sequence, theta.dimension)
    if len(sequence) == 0:
        return 0.0
    return float(np.sum(per_round_losses(theta, sequence)))


def per_round_losses(theta: ParamVector, sequence: LabeledSequence) -> np.ndarray:
    """Vector of per-round losses of a fixed parameter."""
    if len(sequence) == 0:
        return np.zeros(0)
    if sequence.dimension != theta.dimension:
        raise DimensionMismatchError(
            f"Sequence dimension {sequence.dimension} does not match "
            f"parameter dimension {theta.dimension}",
            expected=theta.dimension,
        )
    margins = sequence.labels * (sequence.features @ theta.weights)
    return logistic_loss(margins)


def log_likelihood_matrix(points: np.ndarray, sequence: LabeledSequence) -> np.ndarray:
    """
    Per-round log-likelihoods of many parameters at once.

    Args:
        points: M x d matrix of parameters
        sequence: Labeled examples (T rounds)

    Returns:
        T x M matrix with entry [t, i] = ln p(y_t | x_t, points[i])
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != sequence.dimension:
        raise DimensionMismatchError(
            f"Grid of shape {points.shape} does not match sequence dimension "
            f"{sequence.dimension}"
        )
    margins = sequence.labels[:, None] * (sequence.features @ points.T)
    return -logistic_loss(margins)


class RegretTrace:
    """
    Per-round loss accounting of one online run against a comparator.

    Attributes:
        per_round_alg_loss: Algorithm loss at each round (nats)
        per_round_comparator_loss: Comparator loss at each round (nats)
        cumulative_regret: Running regret after each round (nats)
        comparator: Parameter the regret is measured against, or None when
            the comparator has no finite parameter (empirical rate 0 or 1)
    """

    def __init__(
        self,
        per_round_alg_loss,
        per_round_comparator_loss,
        cumulative_regret=None,
        comparator: Optional[ParamVector] = None,
    ):
        alg = _frozen_array(per_round_alg_loss)
        comp = _frozen_array(per_round_comparator_loss)
        if alg.shape != comp.shape:
            raise DimensionMismatchError(
                f"Algorithm and comparator traces differ in length: "
                f"{alg.shape[0]} vs {comp.shape[0]}"
            )
        if (alg.size and alg.min() < 0) or (comp.size and comp.min() < 0):
            raise ValueError("Losses must be nonnegative")

        running = np.cumsum(alg - comp)
        if cumulative_regret is None:
            cumulative = running
        else:
            cumulative = np.array(cumulative_regret, dtype=float)
            if cumulative.shape != alg.shape:
                raise DimensionMismatchError("Cumulative regret length mismatch")
            if not np.allclose(cumulative, running, rtol=1e-12, atol=CUMULATIVE_ATOL):
                raise ValueError(
                    "Cumulative regret disagrees with the per-round loss differences"
                )

        cumulative.setflags(write=False)
        self.per_round_alg_loss = alg
        self.per_round_comparator_loss = comp
        self.cumulative_regret = cumulative
        self.comparator = comparator

    @property
    def rounds(self) -> int:
        return int(self.per_round_alg_loss.shape[0])

    @property
    def total_regret(self) -> float:
        return float(self.cumulative_regret[-1]) if self.rounds else 0.0

    @property
    def algorithm_loss(self) -> float:
        return float(np.sum(self.per_round_alg_loss))

    @property
    def comparator_loss(self) -> float:
        return float(np.sum(self.per_round_comparator_loss))

    def __len__(self) -> int:
        return self.rounds

    def __repr__(self) -> str:
        return f"RegretTrace(rounds={self.rounds}, total_regret={self.total_regret:.6g})"
