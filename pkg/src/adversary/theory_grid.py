"""
Distinguishable parameter grids for the segmented design
"""

import logging
import math
from typing import List, Optional

import numpy as np
from scipy.special import logit

from adversary.design import SegmentedDesign
from comparators.projection import Norm, NormConstraint
from mixtures.grid import DEFAULT_MAX_POINTS, ParamGrid
from utils.errors import GridSizeError

SPACING_RULES = ('probability', 'logit')

logger = logging.getLogger(__name__)


def probability_spacing(d: int, T: int, eps_exponent: float = 0.0, gamma: int = 1) -> float:
    """delta = (d * gamma / T) ** ((1 - eps_exponent) / 2)."""
    return (d * gamma / T) ** ((1.0 - eps_exponent) / 2.0)


def _level_count(delta: float) -> int:
    return int(math.floor(1.0 / delta + 1e-12))


def _axis_points(
    spacing_rule: str, delta: float, indices: np.ndarray, T: int, clip: bool
) -> np.ndarray:
    if spacing_rule == 'logit':
        return -0.5 * math.log(T) + indices * delta * math.log(T)
    probabilities = indices * delta
    if clip:
        floor = 1.0 / (2.0 * T)
        probabilities = np.clip(probabilities, floor, 1.0 - floor)
    return logit(probabilities)


def build_theory_grid(
    design: SegmentedDesign,
    spacing_rule: str = 'probability',
    eps_exponent: float = 0.0,
    radius_B: Optional[float] = None,
    points_per_dimension: Optional[int] = None,
    max_points: int = DEFAULT_MAX_POINTS,
) -> ParamGrid:
    """
    Product grid whose points the segmented design can tell apart.

    Plain design: every coordinate takes the values logit(j * delta) for
    j = 0..k, with the endpoints p = 0 and p = 1 clipped to 1/(2T) and
    1 - 1/(2T). Scaled design: coordinate 1 is fixed at B, and the other
    coordinates take the interior values j = 1..k-1 of each sub-grid s,
    shifted by -s * B / gamma for s = -gamma..gamma.

    The plain grid has (k + 1)^d points, the endpoints j = 0 and j = k
    included. The scaled grid has ((2 gamma + 1)(k - 1))^(d - 1) points.

    Args:
        design: Segmented design the grid is built for
        spacing_rule: 'probability' (uniform in p) or 'logit' (uniform in psi
            with step delta * ln T)
        eps_exponent: Exponent in delta = (d gamma / T) ** ((1 - eps) / 2)
        radius_B: Value of coordinate 1 in the scaled variant (default gamma ln T)
        points_per_dimension: Override k so that each coordinate (each sub-grid
            in the scaled variant) has exactly this many points
        max_points: Cardinality cap

    Returns:
        ParamGrid with axis_values set; spacing_eps holds delta
    """
    if spacing_rule not in SPACING_RULES:
        raise ValueError(f"Unknown spacing rule {spacing_rule!r}; expected one of {SPACING_RULES}")
    if not 0.0 <= eps_exponent < 1.0:
        raise ValueError(f"eps_exponent must lie in [0, 1), got {eps_exponent}")

    d, T, gamma = design.d, design.T, design.gamma_levels
    scaled = gamma is not None

    if points_per_dimension is not None:
        if points_per_dimension < (1 if scaled else 2):
            raise ValueError(f"Too few points per dimension: {points_per_dimension}")
        k = points_per_dimension + 1 if scaled else points_per_dimension - 1
        delta = 1.0 / k
    else:
        delta = probability_spacing(d, T, eps_exponent, gamma or 1)
        k = _level_count(delta)

    if scaled:
        indices = np.arange(1, k)
        if indices.size < 1:
            raise ValueError(
                f"Scaled grid has no interior points (delta={delta:.4g}); increase T"
            )
        base = _axis_points(spacing_rule, delta, indices, T, clip=False)
        radius = radius_B if radius_B is not None else gamma * math.log(T)
        unit = radius / gamma
        # Sub-grid value ranges must be disjoint.
        if unit <= float(base.max() - base.min()):
            raise ValueError(
                f"Sub-grids overlap for radius_B={radius:g}; use a larger radius"
            )
        values = np.sort(np.concatenate([base - s * unit for s in range(-gamma, gamma + 1)]))
        axes: List[np.ndarray] = [np.array([radius])] + [values] * (d - 1)
        rule = f"theory-scaled ({spacing_rule} spacing, gamma={gamma})"
    else:
        indices = np.arange(0, k + 1)
        if indices.size < 2:
            raise ValueError(f"Theory grid needs at least 2 points per dimension (delta={delta:.4g})")
        values = _axis_points(spacing_rule, delta, indices, T, clip=True)
        axes = [values] * d
        rule = f"theory-plain ({spacing_rule} spacing)"

    cardinality = math.prod(axis.size for axis in axes)
    if cardinality > max_points:
        raise GridSizeError(cardinality, max_points)

    mesh = np.meshgrid(*axes, indexing='ij')
    points = np.stack([m.reshape(-1) for m in mesh], axis=1)
    radius_inf = float(np.max(np.abs(points))) or 1.0

    grid = ParamGrid(
        points,
        delta,
        NormConstraint(Norm.LINF, radius_inf),
        rule,
        axis_values=axes,
    )
    logger.debug(f"Built theory grid {grid} with {axes[-1].size} values per coordinate")
    return grid
