"""
Best-in-hindsight comparator over a norm ball
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import expit

from comparators.projection import NormConstraint, project_array
from core.logistic import (
    LabeledSequence,
    ParamVector,
    SequenceLike,
    as_sequence,
    cumulative_loss,
    logistic_loss,
)

DEFAULT_TOL = 1e-8
ITERATION_FACTOR = 50


@dataclass(frozen=True)
class ComparatorResult:
    """Minimizer of L(theta, S_T) over the ball and how it was reached."""

    theta_star: ParamVector
    loss: float
    iterations: int
    converged: bool


def iteration_cap(d: int, T: int, factor: float = ITERATION_FACTOR) -> int:
    """Default cap: factor * d * ln(T + 1), rounded up."""
    return max(1, math.ceil(factor * d * math.log(T + 1)))


class ComparatorSolver:
    """
    Accelerated projected gradient descent with backtracking.

    The objective L(theta, S_T) is convex and smooth, and projections onto
    all three balls are exact, so each accepted step satisfies the
    sufficient-decrease condition of a projected gradient step. Momentum is
    reset whenever an extrapolated step fails to decrease the loss.
    """

    def __init__(
        self,
        tol: float = DEFAULT_TOL,
        iteration_factor: float = ITERATION_FACTOR,
        shrink: float = 0.5,
    ):
        if tol <= 0:
            raise ValueError(f"Tolerance must be positive, got {tol}")
        if not 0 < shrink < 1:
            raise ValueError(f"Backtracking shrink factor must lie in (0, 1), got {shrink}")
        self.tol = float(tol)
        self.iteration_factor = iteration_factor
        self.shrink = shrink
        self.logger = logging.getLogger(__name__)

    def solve(
        self,
        sequence: SequenceLike,
        constraint: NormConstraint,
        max_iterations: Optional[int] = None,
    ) -> ComparatorResult:
        """
        Minimize the cumulative loss over the constraint ball.

        Args:
            sequence: Nonempty labeled sequence
            constraint: Ball containing the comparator
            max_iterations: Iteration cap (default factor * d * ln(T + 1))

        Returns:
            ComparatorResult; converged is False when the cap was reached
        """
        sequence = as_sequence(sequence)
        if len(sequence) == 0:
            raise ValueError("best comparator needs a nonempty sequence")

        d, T = sequence.dimension, len(sequence)
        cap = max_iterations or iteration_cap(d, T, self.iteration_factor)
        objective = _objective(sequence)

        lipschitz = 0.25 * float(np.sum(sequence.features ** 2))
        step = 1.0 / lipschitz if lipschitz > 0 else 1.0

        theta = np.zeros(d)
        f_theta, g_theta = objective(theta)
        converged = self._mapping_norm(theta, g_theta, step, constraint) <= self.tol
        iterations = 0

        anchor, f_anchor, g_anchor = theta, f_theta, g_theta
        momentum = 1.0
        while not converged and iterations < cap:
            iterations += 1
            step, candidate, f_candidate = self._backtrack(
                objective, anchor, f_anchor, g_anchor, step, constraint
            )
            if f_candidate > f_theta:
                # Restart from the last iterate with a plain projected step.
                momentum = 1.0
                step, candidate, f_candidate = self._backtrack(
                    objective, theta, f_theta, g_theta, step, constraint
                )

            next_momentum = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * momentum ** 2))
            anchor = candidate + ((momentum - 1.0) / next_momentum) * (candidate - theta)
            momentum = next_momentum

            theta = candidate
            f_theta, g_theta = objective(theta)
            f_anchor, g_anchor = objective(anchor)
            converged = self._mapping_norm(theta, g_theta, step, constraint) <= self.tol

        theta_star = ParamVector(theta)
        if not converged:
            self.logger.warning(
                f"Comparator solver hit the iteration cap ({cap}) on {constraint} "
                f"with d={d}, T={T}"
            )
        else:
            self.logger.debug(f"Comparator converged in {iterations} iterations")

        return ComparatorResult(
            theta_star=theta_star,
            loss=cumulative_loss(theta_star, sequence),
            iterations=iterations,
            converged=converged,
        )

    def _backtrack(
        self,
        objective: Callable[[np.ndarray], Tuple[float, np.ndarray]],
        start: np.ndarray,
        f_start: float,
        g_start: np.ndarray,
        step: float,
        constraint: NormConstraint,
    ) -> Tuple[float, np.ndarray, float]:
        slack = 1e-12 * max(1.0, abs(f_start))
        while True:
            candidate = project_array(start - step * g_start, constraint)
            diff = candidate - start
            f_candidate = objective(candidate)[0]
            bound = f_start + g_start @ diff + (diff @ diff) / (2.0 * step)
            if f_candidate <= bound + slack or step < 1e-20:
                return step, candidate, f_candidate
            step *= self.shrink

    @staticmethod
    def _mapping_norm(
        theta: np.ndarray, gradient: np.ndarray, step: float, constraint: NormConstraint
    ) -> float:
        mapped = project_array(theta - step * gradient, constraint)
        return float(np.linalg.norm(theta - mapped)) / step


def _objective(sequence: LabeledSequence) -> Callable[[np.ndarray], Tuple[float, np.ndarray]]:
    features = sequence.features
    labels = sequence.labels.astype(float)

    def value_and_gradient(theta: np.ndarray) -> Tuple[float, np.ndarray]:
        margins = labels * (features @ theta)
        value = float(np.sum(logistic_loss(margins)))
        gradient = -(features.T @ (labels * expit(-margins)))
        return value, gradient

    return value_and_gradient


def best_comparator(
    sequence: SequenceLike,
    constraint: NormConstraint,
    tol: float = DEFAULT_TOL,
    max_iterations: Optional[int] = None,
) -> ComparatorResult:
    """
    theta* = argmin over the ball of L(theta, S_T).

    Args:
        sequence: Nonempty labeled sequence
        constraint: Comparator ball
        tol: Projected-gradient norm at which the solver stops
        max_iterations: Optional override of the iteration cap

    Returns:
        ComparatorResult
    """
    return ComparatorSolver(tol=tol).solve(sequence, constraint, max_iterations)
