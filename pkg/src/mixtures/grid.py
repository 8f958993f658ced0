"""
Finite parameter grids supporting the discrete mixtures
"""

import logging
import math
from typing import Dict, Iterator, Optional, Sequence, Tuple

import numpy as np

from comparators.projection import Norm, NormConstraint
from core.logistic import ParamVector
from utils.errors import GridSizeError

DEFAULT_MAX_POINTS = 20_000_000

# Slack when turning real-valued margins into integer index budgets.
_INDEX_TOL = 1e-9

# Above this many array-element operations the exact count is skipped and
# enumeration with an early abort decides the cap instead.
_COUNT_WORK_LIMIT = 5e8

logger = logging.getLogger(__name__)


class ParamGrid:
    """
    Support of a discrete mixture: M distinct parameter vectors.

    Attributes:
        points: M x d read-only matrix, rows in enumeration order
        spacing_eps: Lattice step (probability spacing for theory grids)
        constraint: Ball the grid was built for
        margin_rule: Description of the inclusion rule
        indices: Integer lattice coordinates (points = indices * spacing_eps)
            for lattice grids, None otherwise
        axis_values: Per-coordinate value sets for product grids
    """

    def __init__(
        self,
        points: np.ndarray,
        spacing_eps: float,
        constraint: NormConstraint,
        margin_rule: str,
        indices: Optional[np.ndarray] = None,
        axis_values: Optional[Sequence[np.ndarray]] = None,
    ):
        points = np.array(points, dtype=float, copy=True)
        if points.ndim != 2 or points.shape[0] < 1:
            raise ValueError(f"Grid needs at least one point, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise ValueError("Grid points must be finite")
        if spacing_eps <= 0:
            raise ValueError(f"Grid spacing must be positive, got {spacing_eps}")

        if indices is not None:
            indices = np.array(indices, dtype=np.int64, copy=True)
            if indices.shape != points.shape or not np.array_equal(
                points, indices * float(spacing_eps)
            ):
                raise ValueError("Lattice grid points must equal indices * spacing_eps")
            indices.setflags(write=False)
        elif points.shape[0] <= 1_000_000:
            if np.unique(points, axis=0).shape[0] != points.shape[0]:
                raise ValueError("Grid points must be distinct")

        points.setflags(write=False)
        self.points = points
        self.spacing_eps = float(spacing_eps)
        self.constraint = constraint
        self.margin_rule = margin_rule
        self.indices = indices
        self.axis_values = (
            tuple(np.array(values, dtype=float) for values in axis_values)
            if axis_values is not None
            else None
        )
        self._lookup: Optional[Dict[Tuple[int, ...], int]] = None

    @property
    def cardinality(self) -> int:
        return int(self.points.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.points.shape[1])

    @property
    def is_lattice(self) -> bool:
        return self.indices is not None

    def __len__(self) -> int:
        return self.cardinality

    def __getitem__(self, index: int) -> ParamVector:
        return ParamVector(self.points[index])

    def __iter__(self) -> Iterator[ParamVector]:
        for index in range(self.cardinality):
            yield self[index]

    def index_of_lattice(self, lattice_index: Sequence[int]) -> Optional[int]:
        """Position of an integer lattice coordinate in the grid, or None."""
        if self.indices is None:
            raise ValueError("Lattice lookup requires a lattice grid")
        if self._lookup is None:
            self._lookup = {tuple(row): i for i, row in enumerate(self.indices.tolist())}
        return self._lookup.get(tuple(int(v) for v in lattice_index))

    def index_of(self, theta: ParamVector) -> Optional[int]:
        """Position of an exact grid point, or None when theta is not on the grid."""
        matches = np.nonzero(np.all(self.points == theta.weights, axis=1))[0]
        return int(matches[0]) if matches.size else None

    def permuted(self, order: Sequence[int]) -> 'ParamGrid':
        """Same point set in a different enumeration order."""
        order = np.asarray(order)
        return ParamGrid(
            self.points[order],
            self.spacing_eps,
            self.constraint,
            self.margin_rule,
            indices=None if self.indices is None else self.indices[order],
            axis_values=self.axis_values,
        )

    def __repr__(self) -> str:
        return (
            f"ParamGrid(M={self.cardinality}, d={self.dimension}, "
            f"eps={self.spacing_eps:g}, {self.constraint})"
        )


def default_spacing(T: int) -> float:
    """Lattice step 4 / sqrt(T), i.e. eps^2 = 16 / T."""
    if T < 1:
        raise ValueError(f"Horizon must be at least 1, got {T}")
    return 4.0 / math.sqrt(T)


def margin_rule(constraint: NormConstraint, d: int) -> str:
    """Human-readable inclusion rule for the lattice grid."""
    return {
        Norm.L1: f"||psi||_1 <= B + d*eps (d={d})",
        Norm.L2: f"||psi||_2 <= B + sqrt(d)*eps (d={d})",
        Norm.LINF: "||psi||_inf <= B + eps",
    }[constraint.norm]


def _index_budget(d: int, constraint: NormConstraint, spacing_eps: float) -> Tuple[int, int]:
    """
    Integer form of the margin rule.

    Returns:
        (K, budget): per-coordinate index range |i| <= K and the bound on
        sum |i| (L1) or sum i^2 (L2); budget is unused for Linf
    """
    ratio = constraint.radius_B / spacing_eps
    K = int(math.floor(ratio + _INDEX_TOL)) + 1
    if constraint.norm is Norm.L1:
        return K, int(math.floor(ratio + d + _INDEX_TOL))
    if constraint.norm is Norm.L2:
        return K, int(math.floor((ratio + math.sqrt(d)) ** 2 + _INDEX_TOL))
    return K, 0


def _index_cost(values: np.ndarray, norm: Norm) -> np.ndarray:
    return np.abs(values) if norm is Norm.L1 else values * values


def grid_cardinality(
    d: int, constraint: NormConstraint, spacing_eps: float
) -> Optional[int]:
    """
    Exact number of lattice points build_grid would return.

    Counted by dynamic programming over the integer index norm, without
    materializing the grid.

    Args:
        d: Dimension
        constraint: Ball
        spacing_eps: Lattice step

    Returns:
        Point count, or None when counting would be too expensive
    """
    if spacing_eps <= 0:
        raise ValueError(f"Grid spacing must be positive, got {spacing_eps}")
    K, budget = _index_budget(d, constraint, spacing_eps)
    if constraint.norm is Norm.LINF:
        return (2 * K + 1) ** d

    if d * (K + 1) * (budget + 1) > _COUNT_WORK_LIMIT:
        return None

    magnitudes = np.arange(K + 1)
    costs = _index_cost(magnitudes, constraint.norm)
    counts = np.zeros(budget + 1)
    counts[0] = 1.0
    for _ in range(d):
        updated = np.zeros_like(counts)
        for magnitude, cost in zip(magnitudes, costs):
            if cost > budget:
                continue
            multiplicity = 1.0 if magnitude == 0 else 2.0
            updated[cost:] += multiplicity * counts[: budget + 1 - cost]
        counts = updated
    total = float(counts.sum())
    if not math.isfinite(total):
        return None
    return int(round(total))


def _cardinality_floor(d: int, constraint: NormConstraint, spacing_eps: float) -> int:
    """Size of the largest index cube certainly inside the margin rule."""
    K, budget = _index_budget(d, constraint, spacing_eps)
    if constraint.norm is Norm.LINF:
        return (2 * K + 1) ** d
    if constraint.norm is Norm.L1:
        inner = min(K, budget // d)
    else:
        inner = min(K, int(math.isqrt(budget // d)))
    return (2 * inner + 1) ** d


def build_grid(
    d: int,
    constraint: NormConstraint,
    spacing_eps: float,
    max_points: int = DEFAULT_MAX_POINTS,
) -> ParamGrid:
    """
    Lattice grid with the per-norm margin rule.

    Coordinates are i * eps with |i| <= floor(B/eps) + 1, kept when
    ||psi||_1 <= B + d*eps (L1), ||psi||_2 <= B + sqrt(d)*eps (L2) or
    ||psi||_inf <= B + eps (Linf). Every bracketing corner of a feasible
    theta is therefore on the grid. Points are enumerated in lexicographic
    order of their indices.

    Args:
        d: Dimension (>= 1)
        constraint: Comparator ball
        spacing_eps: Lattice step eps > 0
        max_points: Cardinality cap

    Returns:
        ParamGrid

    Raises:
        GridSizeError: When the grid would exceed max_points
    """
    if d < 1:
        raise ValueError(f"Dimension must be at least 1, got {d}")
    if spacing_eps <= 0 or not math.isfinite(spacing_eps):
        raise ValueError(f"Grid spacing must be positive, got {spacing_eps}")

    requested = grid_cardinality(d, constraint, spacing_eps)
    if requested is None:
        floor_count = _cardinality_floor(d, constraint, spacing_eps)
        if floor_count > max_points:
            raise GridSizeError(
                floor_count,
                max_points,
                f"Grid needs at least {floor_count} points, above the cap of {max_points}",
            )
    elif requested > max_points:
        raise GridSizeError(requested, max_points)

    K, budget = _index_budget(d, constraint, spacing_eps)
    values = np.arange(-K, K + 1, dtype=np.int64)
    value_costs = _index_cost(values, constraint.norm)

    indices = np.zeros((1, 0), dtype=np.int64)
    partial = np.zeros(1, dtype=np.int64)
    for _ in range(d):
        rows = indices.shape[0]
        extended = np.repeat(indices, values.size, axis=0)
        column = np.tile(values, rows)
        cost = np.repeat(partial, values.size) + np.tile(value_costs, rows)
        keep = cost <= budget if constraint.norm is not Norm.LINF else slice(None)
        indices = np.hstack([extended[keep], column[keep][:, None]])
        partial = cost[keep]
        # Prefix counts never exceed the final count (pad with zeros).
        if indices.shape[0] > max_points:
            raise GridSizeError(
                indices.shape[0],
                max_points,
                f"Grid needs at least {indices.shape[0]} points, above the cap of {max_points}",
            )

    points = indices * float(spacing_eps)
    grid = ParamGrid(
        points,
        spacing_eps,
        constraint,
        margin_rule(constraint, d),
        indices=indices,
    )
    logger.debug(f"Built {grid}")
    return grid
