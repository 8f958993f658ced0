"""
Bayesian mixture over a parameter grid: priors, posterior updates and
online prediction
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit, logsumexp

from comparators.solver import best_comparator
from core.logistic import (
    LabeledExample,
    ParamVector,
    RegretTrace,
    SequenceLike,
    as_sequence,
    log_likelihood_matrix,
    logistic_loss,
    per_round_losses,
)
from mixtures.grid import ParamGrid, build_grid
from utils.errors import DimensionMismatchError, FeatureBoundError

# Rounds x grid points evaluated per vectorized block in run_online.
BLOCK_ELEMENTS = 1 << 22

# Corners of Q are enumerated explicitly up to this many fractional coordinates.
MAX_CERTIFICATE_COORDINATES = 20

_TINY = np.finfo(float).tiny
_BELOW_ONE = np.nextafter(1.0, 0.0)

logger = logging.getLogger(__name__)


class PriorKind(str, Enum):
    UNIFORM = 'uniform'
    QUANTIZED_GAUSSIAN = 'quantized_gaussian'


@dataclass(frozen=True)
class PriorSpec:
    """Prior family on the grid and, for the Gaussian kind, its variance nu^2."""

    kind: PriorKind = PriorKind.UNIFORM
    gaussian_variance: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', PriorKind(self.kind))
        if self.kind is PriorKind.QUANTIZED_GAUSSIAN:
            if self.gaussian_variance is None:
                raise ValueError("quantized_gaussian prior requires gaussian_variance")
            if not self.gaussian_variance > 0:
                raise ValueError(
                    f"Gaussian prior variance must be positive, got {self.gaussian_variance}"
                )

    @classmethod
    def uniform(cls) -> 'PriorSpec':
        return cls(PriorKind.UNIFORM)

    @classmethod
    def gaussian(cls, variance: float) -> 'PriorSpec':
        return cls(PriorKind.QUANTIZED_GAUSSIAN, variance)


class LogPosterior:
    """Log-domain mixture weights aligned index-for-index with a grid."""

    def __init__(self, log_weights: np.ndarray):
        log_weights = np.array(log_weights, dtype=float, copy=True)
        if log_weights.ndim != 1 or log_weights.size == 0:
            raise ValueError("Log-weights must be a nonempty vector")
        if not np.all(np.isfinite(log_weights)):
            raise ValueError("Log-weights must be finite")
        log_weights.setflags(write=False)
        self.log_weights = log_weights

    @classmethod
    def normalized(cls, unnormalized: np.ndarray) -> 'LogPosterior':
        """Shift log-weights so that they sum to one in probability."""
        unnormalized = np.asarray(unnormalized, dtype=float)
        return cls(unnormalized - logsumexp(unnormalized))

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def log_normalizer(self) -> float:
        return float(logsumexp(self.log_weights))

    def __len__(self) -> int:
        return int(self.log_weights.shape[0])


def _check_aligned(posterior: LogPosterior, grid: ParamGrid) -> None:
    if len(posterior) != grid.cardinality:
        raise DimensionMismatchError(
            f"Posterior has {len(posterior)} weights for a grid of {grid.cardinality} points"
        )


def init_posterior(grid: ParamGrid, prior: PriorSpec) -> LogPosterior:
    """
    Prior weights on the grid.

    Args:
        grid: Mixture support
        prior: Uniform, or quantized Gaussian with log-weight -||psi||^2 / (2 nu^2)

    Returns:
        Normalized LogPosterior
    """
    if prior.kind is PriorKind.UNIFORM:
        return LogPosterior(np.full(grid.cardinality, -math.log(grid.cardinality)))

    squared_norms = np.sum(grid.points ** 2, axis=1)
    return LogPosterior.normalized(-squared_norms / (2.0 * prior.gaussian_variance))


def posterior_update(
    posterior: LogPosterior, grid: ParamGrid, example: LabeledExample
) -> LogPosterior:
    """Bayes step: add ln p(y | x, psi_i) to every log-weight and renormalize."""
    _check_aligned(posterior, grid)
    if example.dimension != grid.dimension:
        raise DimensionMismatchError(
            f"Example dimension {example.dimension} does not match grid dimension {grid.dimension}"
        )
    margins = example.label * (grid.points @ example.features)
    return LogPosterior.normalized(posterior.log_weights - logistic_loss(margins))


def mixture_predict(posterior: LogPosterior, grid: ParamGrid, features: np.ndarray) -> float:
    """
    Mixture probability that the next label is +1.

    Args:
        posterior: Current weights
        grid: Mixture support
        features: Next feature vector (|x_i| <= 1)

    Returns:
        Probability in (0, 1)
    """
    _check_aligned(posterior, grid)
    features = np.asarray(features, dtype=float)
    if features.shape != (grid.dimension,):
        raise DimensionMismatchError(
            f"Feature vector of shape {features.shape} does not match grid dimension {grid.dimension}"
        )
    if not np.all(np.isfinite(features)):
        raise FeatureBoundError("Feature vector has non-finite entries")
    if features.size and np.max(np.abs(features)) > 1.0:
        raise FeatureBoundError("Feature coordinates must satisfy |x_i| <= 1")

    dots = grid.points @ features
    log_plus = logsumexp(posterior.log_weights - logistic_loss(dots))
    log_minus = logsumexp(posterior.log_weights - logistic_loss(-dots))
    return float(np.clip(expit(log_plus - log_minus), _TINY, _BELOW_ONE))


def run_online(
    grid: ParamGrid,
    prior: PriorSpec,
    sequence: SequenceLike,
    comparator: Optional[ParamVector] = None,
) -> Tuple[RegretTrace, LogPosterior]:
    """
    Run the mixture over a sequence and score it against a comparator.

    The loss at round t is -ln of the mixture probability of y_t given x_t.
    Rounds are processed in vectorized blocks: within a block the
    normalizers of the running log-posterior telescope into per-round losses.

    Args:
        grid: Mixture support
        prior: Prior on the grid
        sequence: Labeled examples
        comparator: Parameter to measure regret against (default: the best
            comparator in the grid's constraint ball)

    Returns:
        (RegretTrace, final LogPosterior)
    """
    sequence = as_sequence(sequence, grid.dimension)
    if len(sequence) and sequence.dimension != grid.dimension:
        raise DimensionMismatchError(
            f"Sequence dimension {sequence.dimension} does not match grid dimension {grid.dimension}"
        )

    if comparator is None:
        comparator = (
            best_comparator(sequence, grid.constraint).theta_star
            if len(sequence)
            else ParamVector.zeros(grid.dimension)
        )

    running = init_posterior(grid, prior).log_weights.copy()
    losses = np.zeros(len(sequence))
    block = max(1, BLOCK_ELEMENTS // grid.cardinality)

    for start in range(0, len(sequence), block):
        stop = min(start + block, len(sequence))
        log_likelihoods = log_likelihood_matrix(grid.points, sequence.subsequence(start, stop))
        cumulative = running[None, :] + np.cumsum(log_likelihoods, axis=0)
        normalizers = logsumexp(cumulative, axis=1)
        losses[start:stop] = -np.diff(np.concatenate(([0.0], normalizers)))
        running = cumulative[-1] - normalizers[-1]

    trace = RegretTrace(
        np.maximum(losses, 0.0),
        per_round_losses(comparator, sequence),
        comparator=comparator,
    )
    return trace, LogPosterior.normalized(running)


def sequence_probability(grid: ParamGrid, prior: PriorSpec, sequence: SequenceLike) -> float:
    """
    Direct mixture code length -ln sum_theta p(y^T | x^T, theta) p_0(theta).

    Args:
        grid: Mixture support
        prior: Prior on the grid
        sequence: Labeled examples

    Returns:
        Code length in nats
    """
    sequence = as_sequence(sequence, grid.dimension)
    log_prior = init_posterior(grid, prior).log_weights
    if len(sequence) == 0:
        return float(-logsumexp(log_prior))
    totals = np.sum(log_likelihood_matrix(grid.points, sequence), axis=0)
    return float(-logsumexp(log_prior + totals))


class BayesianMixture:
    """
    Online mixture predictor on a fixed grid and prior.

    Implements the OnlineAlgorithm interface; the final posterior of the
    most recent run is kept in last_posterior.
    """

    def __init__(self, grid: ParamGrid, prior: Optional[PriorSpec] = None, name: str = 'grid-mixture'):
        self.grid = grid
        self.prior = prior or PriorSpec.uniform()
        self.name = name
        self.last_posterior: Optional[LogPosterior] = None

    def run(self, sequence: SequenceLike, comparator: Optional[ParamVector] = None) -> RegretTrace:
        trace, self.last_posterior = run_online(self.grid, self.prior, sequence, comparator)
        return trace


def variational_certificate(
    grid: ParamGrid, prior: PriorSpec, theta_star: ParamVector, T: int
) -> float:
    """
    Instance-level regret certificate for the mixture against theta_star.

    Q puts independent Bernoulli weight on the lower and upper lattice
    neighbours of every coordinate, with mean exactly theta_star. The
    certificate is D(Q || p_0) + (T/8) * sum_i alpha_i (1 - alpha_i) eps^2.

    Args:
        grid: Lattice grid the mixture runs on
        prior: Prior on the grid
        theta_star: Comparator
        T: Horizon

    Returns:
        Certificate in nats (infinite if a corner is missing from the grid)
    """
    if not grid.is_lattice:
        raise ValueError("Variational certificate requires a lattice grid")
    if theta_star.dimension != grid.dimension:
        raise DimensionMismatchError("Comparator dimension does not match grid dimension")

    eps = grid.spacing_eps
    scaled = theta_star.weights / eps
    lower = np.floor(scaled).astype(np.int64)
    alpha = scaled - lower
    fractional = np.nonzero(alpha > 0)[0]
    if fractional.size > MAX_CERTIFICATE_COORDINATES:
        raise ValueError(
            f"Certificate enumerates 2^{fractional.size} corners; "
            f"limit is 2^{MAX_CERTIFICATE_COORDINATES}"
        )

    log_prior = init_posterior(grid, prior).log_weights
    divergence = 0.0
    for choice in itertools.product((0, 1), repeat=int(fractional.size)):
        corner = lower.copy()
        log_q = 0.0
        for coordinate, upper in zip(fractional, choice):
            corner[coordinate] += upper
            a = alpha[coordinate]
            log_q += math.log(a) if upper else math.log1p(-a)
        position = grid.index_of_lattice(corner)
        if position is None:
            return math.inf
        divergence += math.exp(log_q) * (log_q - log_prior[position])

    variance = float(np.sum(alpha * (1.0 - alpha))) * eps ** 2
    return divergence + T * variance / 8.0


def refinement_delta(
    d: int,
    constraint,
    spacing_eps: float,
    prior: PriorSpec,
    sequence: SequenceLike,
    max_points: Optional[int] = None,
) -> float:
    """
    Largest change of a per-round prediction when the lattice step is halved.

    Both mixtures are run over the sequence; the predicted probabilities of
    the observed labels are compared round by round, round 1 included.
    On a symmetric lattice the round-1 prediction alone is always 1/2.

    Args:
        d: Dimension
        constraint: Ball for the lattice
        spacing_eps: Current lattice step
        prior: Prior on both lattices
        sequence: Sequence whose predictions are compared
        max_points: Optional cap for the refined lattice

    Returns:
        max_t |p_eps(y_t | x_t, S_{t-1}) - p_{eps/2}(y_t | x_t, S_{t-1})|
        (the round-1 difference at x = 0 for an empty sequence)
    """
    sequence = as_sequence(sequence, d)
    kwargs = {} if max_points is None else {'max_points': max_points}
    grids = [build_grid(d, constraint, eps, **kwargs) for eps in (spacing_eps, spacing_eps / 2.0)]

    if len(sequence) == 0:
        predictions = [mixture_predict(init_posterior(g, prior), g, np.zeros(d)) for g in grids]
        return abs(predictions[1] - predictions[0])

    zero = ParamVector.zeros(d)
    coarse, fine = (run_online(g, prior, sequence, comparator=zero)[0] for g in grids)
    return float(np.max(np.abs(
        np.exp(-coarse.per_round_alg_loss) - np.exp(-fine.per_round_alg_loss)
    )))
