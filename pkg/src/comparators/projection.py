"""
Norm balls and exact Euclidean projections onto them
"""

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from core.logistic import ParamVector

# Points within this much of the radius count as feasible, which keeps
# projection idempotent under float rounding.
FEASIBILITY_SLACK = 1e-13


class Norm(str, Enum):
    L1 = 'l1'
    L2 = 'l2'
    LINF = 'linf'

    @classmethod
    def parse(cls, value: Union[str, 'Norm']) -> 'Norm':
        if isinstance(value, Norm):
            return value
        key = str(value).strip().lower().replace('∞', 'inf')
        aliases = {'l1': cls.L1, 'l2': cls.L2, 'linf': cls.LINF, 'inf': cls.LINF}
        if key not in aliases:
            raise ValueError(f"Unknown norm {value!r}; expected one of l1, l2, linf")
        return aliases[key]

    @property
    def order(self) -> float:
        return {Norm.L1: 1, Norm.L2: 2, Norm.LINF: np.inf}[self]

    @property
    def label(self) -> str:
        return {Norm.L1: 'L1', Norm.L2: 'L2', Norm.LINF: 'Linf'}[self]


@dataclass(frozen=True)
class NormConstraint:
    """The comparator set {theta : ||theta||_rho <= B}."""

    norm: Norm
    radius_B: float

    def __post_init__(self):
        object.__setattr__(self, 'norm', Norm.parse(self.norm))
        radius = float(self.radius_B)
        if not np.isfinite(radius) or radius <= 0:
            raise ValueError(f"Radius B must be positive, got {self.radius_B}")
        object.__setattr__(self, 'radius_B', radius)

    def norm_of(self, weights: np.ndarray) -> float:
        weights = np.asarray(weights, dtype=float)
        if weights.size == 0:
            return 0.0
        return float(np.linalg.norm(weights, ord=self.norm.order))

    def contains(self, theta: Union[ParamVector, np.ndarray], slack: float = FEASIBILITY_SLACK) -> bool:
        weights = theta.weights if isinstance(theta, ParamVector) else theta
        return self.norm_of(weights) <= self.radius_B + slack

    def __str__(self) -> str:
        return f"{self.norm.label}(B={self.radius_B:g})"


def project(theta: ParamVector, constraint: NormConstraint) -> ParamVector:
    """
    Euclidean projection of theta onto the constraint ball.

    Args:
        theta: Finite parameter vector
        constraint: Norm ball

    Returns:
        theta itself when feasible, otherwise the closest point of the ball
    """
    if constraint.contains(theta):
        return theta
    return ParamVector(project_array(theta.weights, constraint))


def project_array(weights: np.ndarray, constraint: NormConstraint) -> np.ndarray:
    """Projection on raw arrays; used inside the solvers."""
    weights = np.asarray(weights, dtype=float)
    if constraint.contains(weights):
        return weights.copy()

    radius = constraint.radius_B
    if constraint.norm is Norm.LINF:
        return np.clip(weights, -radius, radius)
    if constraint.norm is Norm.L2:
        return weights * (radius / np.linalg.norm(weights))
    return _project_l1(weights, radius)


def _project_l1(weights: np.ndarray, radius: float) -> np.ndarray:
    """
    Sort-based soft-thresholding onto the L1 ball of the given radius.

    Coordinates whose magnitude equals the threshold map to exactly zero.
    """
    magnitudes = np.abs(weights)
    ordered = np.sort(magnitudes)[::-1]
    cumulative = np.cumsum(ordered)
    ranks = np.arange(1, ordered.size + 1)
    positive = ordered - (cumulative - radius) / ranks > 0
    rho = int(np.nonzero(positive)[0][-1])
    threshold = (cumulative[rho] - radius) / (rho + 1.0)
    return np.sign(weights) * np.maximum(magnitudes - threshold, 0.0)
