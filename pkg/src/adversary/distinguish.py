"""
Monte Carlo distinguishability and capacity experiments on a theory grid
"""

import copy
import itertools
import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import expit

from adversary.design import SegmentedDesign
from bounds.calculator import fano_error_bound
from core.logistic import LabeledSequence, ParamVector, log_likelihood_matrix, logistic_loss
from core.online import OnlineAlgorithm
from mixtures.grid import ParamGrid
from utils.parallel import parallel_map
from utils.seeding import make_rng, trial_rng

# Points whose total log-likelihood is within this relative distance of the
# best one count as tied; ties resolve to the lowest grid index.
TIE_RTOL = 1e-12

# Largest 2^T * M product exact_error_probability will enumerate.
EXACT_WORK_LIMIT = 1 << 22
MAX_EXACT_ROUNDS = 20

# Grid rows scored per block when identifying the ML point.
_BLOCK_ELEMENTS = 1 << 22

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.Generator]


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(seed)


def _draw(design: SegmentedDesign, grid: ParamGrid, rng: np.random.Generator) -> Tuple[int, np.ndarray]:
    index = int(rng.integers(grid.cardinality))
    probabilities = expit(design.features @ grid.points[index])
    labels = np.where(rng.random(design.T) < probabilities, 1, -1)
    return index, labels


def sample_and_label(
    design: SegmentedDesign, grid: ParamGrid, seed: SeedLike
) -> Tuple[ParamVector, LabeledSequence]:
    """
    Draw a grid point uniformly and label the design with it.

    Args:
        design: Segmented feature sequence
        grid: Candidate parameters
        seed: Integer seed or an existing Generator

    Returns:
        (true parameter, labeled sequence)
    """
    if grid.dimension != design.d:
        raise ValueError(f"Grid dimension {grid.dimension} does not match design dimension {design.d}")
    index, labels = _draw(design, grid, _rng(seed))
    return grid[index], design.with_labels(labels)


def _first_maximum(totals: np.ndarray) -> int:
    best = float(np.max(totals))
    tolerance = TIE_RTOL * max(1.0, abs(best))
    return int(np.flatnonzero(totals >= best - tolerance)[0])


def ml_identify_index(grid: ParamGrid, sequence: LabeledSequence) -> int:
    """Index of the maximum-likelihood grid point; ties go to the lowest index."""
    T = max(len(sequence), 1)
    block = max(1, _BLOCK_ELEMENTS // T)
    totals = np.empty(grid.cardinality)
    for start in range(0, grid.cardinality, block):
        points = grid.points[start:start + block]
        if len(sequence):
            totals[start:start + block] = log_likelihood_matrix(points, sequence).sum(axis=0)
        else:
            totals[start:start + block] = 0.0
    return _first_maximum(totals)


def ml_identify(grid: ParamGrid, sequence: LabeledSequence) -> ParamVector:
    """
    Maximum-likelihood grid point for a labeled sequence.

    Args:
        grid: Candidate parameters
        sequence: Labeled examples

    Returns:
        Grid point with the largest likelihood (lowest index among ties)
    """
    return grid[ml_identify_index(grid, sequence)]


@dataclass(frozen=True)
class DistinguishabilityReport:
    """Estimated ML error rate and the regret lower bounds it implies (nats)."""

    grid_cardinality_M: int
    trials: int
    error_rate_Pe: float
    standard_error: float
    expected_regret_lower: float
    fano_regret_lower: float
    exact_error_rate: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def estimate_pe(
    design: SegmentedDesign,
    grid: ParamGrid,
    trials: int,
    seed: int,
    threads: Optional[int] = None,
) -> DistinguishabilityReport:
    """
    Estimate the probability that ML misidentifies the true grid point.

    Each trial owns the generator trial_rng(seed, i), so the estimate does
    not depend on the worker count.

    Args:
        design: Segmented feature sequence
        grid: Candidate parameters
        trials: Number of Monte Carlo trials
        seed: Experiment seed
        threads: Worker cap

    Returns:
        DistinguishabilityReport
    """
    if trials < 1:
        raise ValueError(f"Need at least one trial, got {trials}")

    def one_trial(trial: int) -> bool:
        index, labels = _draw(design, grid, trial_rng(seed, trial))
        return ml_identify_index(grid, design.with_labels(labels)) != index

    errors = np.array(parallel_map(one_trial, range(trials), threads, 'trials'), dtype=bool)
    rate = float(errors.mean())
    M = grid.cardinality
    exact = None
    if design.T <= MAX_EXACT_ROUNDS and (M << design.T) <= EXACT_WORK_LIMIT:
        exact = exact_error_probability(design, grid)

    report = DistinguishabilityReport(
        grid_cardinality_M=M,
        trials=trials,
        error_rate_Pe=rate,
        standard_error=math.sqrt(rate * (1.0 - rate) / trials),
        expected_regret_lower=(1.0 - rate) * math.log(M) - 1.0,
        fano_regret_lower=fano_error_bound(rate, M),
        exact_error_rate=exact,
    )
    logger.info(f"ML error rate {rate:.4f} over {trials} trials on {M} grid points")
    return report


def exact_error_probability(design: SegmentedDesign, grid: ParamGrid) -> float:
    """
    ML error probability by enumerating every label sequence.

    Args:
        design: Segmented feature sequence (T <= 20)
        grid: Candidate parameters

    Returns:
        Probability that ML returns a point other than the uniformly drawn one
    """
    T, M = design.T, grid.cardinality
    if T > MAX_EXACT_ROUNDS:
        raise ValueError(f"Exact enumeration supports T <= {MAX_EXACT_ROUNDS}, got {T}")

    margins = design.features @ grid.points.T
    log_plus = -logistic_loss(margins)
    log_minus = -logistic_loss(-margins)
    labels = np.array(list(itertools.product((-1, 1), repeat=T)), dtype=float).reshape(-1, T)
    positive = (labels == 1).astype(float)
    log_likelihood = positive @ log_plus + (1.0 - positive) @ log_minus

    correct = math.fsum(math.exp(row[_first_maximum(row)]) for row in log_likelihood)
    return float(min(1.0, max(0.0, 1.0 - correct / M)))


@dataclass(frozen=True)
class CapacityReport:
    """Measured expected regret on grid-labeled sequences against its lower bound."""

    measured_expected_regret: float
    bound: float
    standard_error: float
    error_rate: float
    violation: bool
    grid_cardinality: int
    trials: int
    algorithm: str = ''

    def to_dict(self) -> dict:
        return asdict(self)


def capacity_experiment(
    algorithm: OnlineAlgorithm,
    design: SegmentedDesign,
    grid: ParamGrid,
    trials: int,
    seed: int,
    threads: Optional[int] = None,
) -> CapacityReport:
    """
    Run an algorithm on sequences labeled by random grid points.

    Regret is measured against the true grid point of each trial and
    compared with (1 - Pe) ln M - 1, Pe estimated on the same trials.
    Each trial runs its own shallow copy of the algorithm.

    Args:
        algorithm: Online algorithm under test
        design: Segmented feature sequence
        grid: Candidate parameters
        trials: Number of Monte Carlo trials
        seed: Experiment seed
        threads: Worker cap

    Returns:
        CapacityReport; violation is set when the mean regret is more than
        three standard errors below the bound
    """
    if trials < 1:
        raise ValueError(f"Need at least one trial, got {trials}")

    def one_trial(trial: int) -> Tuple[float, bool]:
        index, labels = _draw(design, grid, trial_rng(seed, trial))
        sequence = design.with_labels(labels)
        trace = copy.copy(algorithm).run(sequence, comparator=grid[index])
        return trace.total_regret, ml_identify_index(grid, sequence) != index

    outcomes = parallel_map(one_trial, range(trials), threads, 'capacity trials')
    regrets = np.array([regret for regret, _ in outcomes])
    error_rate = float(np.mean([error for _, error in outcomes]))

    M = grid.cardinality
    mean = float(regrets.mean())
    standard_error = float(regrets.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    bound = (1.0 - error_rate) * math.log(M) - 1.0
    violation = mean < bound - 3.0 * standard_error
    if violation:
        logger.warning(
            f"{algorithm.name}: mean regret {mean:.4f} is below the capacity bound {bound:.4f}"
        )

    return CapacityReport(
        measured_expected_regret=mean,
        bound=bound,
        standard_error=standard_error,
        error_rate=error_rate,
        violation=bool(violation),
        grid_cardinality=M,
        trials=trials,
        algorithm=getattr(algorithm, 'name', type(algorithm).__name__),
    )
