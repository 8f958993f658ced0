"""
Segmented feature sequences used by the lower-bound construction
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.logistic import LabeledSequence
from utils.errors import InfeasibleDesignError


@dataclass(frozen=True, eq=False)
class SegmentedDesign:
    """
    Fixed feature sequence x^T split into one segment per coordinate.

    Without gamma_levels, segment i sets x_{t,i} = 1. With gamma_levels,
    the segments cover coordinates 2..d and each is split into 2*gamma + 1
    subsegments with x_{t,1} = s / gamma for s = -gamma..gamma. Remainder
    rounds carry the zero vector.
    """

    d: int
    T: int
    gamma_levels: Optional[int]
    features: np.ndarray

    @property
    def segment_count(self) -> int:
        if self.gamma_levels is None:
            return self.d
        return (self.d - 1) * (2 * self.gamma_levels + 1)

    @property
    def segment_length(self) -> int:
        return self.T // self.segment_count

    def with_labels(self, labels) -> LabeledSequence:
        return LabeledSequence(self.features, labels)


def build_design(d: int, T: int, gamma_levels: Optional[int] = None) -> SegmentedDesign:
    """
    Build the deterministic segmented feature sequence.

    Args:
        d: Dimension
        T: Horizon
        gamma_levels: Number of subsegment scaling levels (scaled variant)

    Returns:
        SegmentedDesign

    Raises:
        InfeasibleDesignError: When T is too short for the segment layout
    """
    if d < 1:
        raise InfeasibleDesignError(f"Dimension must be at least 1, got {d}", d=d, T=T)

    features = np.zeros((T, d))
    if gamma_levels is None:
        if T < d:
            raise InfeasibleDesignError(
                f"Horizon T={T} is shorter than the {d} segments of the design", d=d, T=T
            )
        length = T // d
        for coordinate in range(d):
            features[coordinate * length:(coordinate + 1) * length, coordinate] = 1.0
    else:
        if gamma_levels < 1:
            raise InfeasibleDesignError(
                f"gamma_levels must be at least 1, got {gamma_levels}", d=d, T=T
            )
        if d < 2:
            raise InfeasibleDesignError(
                "The scaled design needs d >= 2 (coordinate 1 carries the scale)", d=d, T=T
            )
        levels = 2 * gamma_levels + 1
        if T < (d - 1) * levels:
            raise InfeasibleDesignError(
                f"Horizon T={T} is shorter than the {(d - 1) * levels} subsegments "
                f"of the scaled design",
                d=d,
                T=T,
                gamma_levels=gamma_levels,
            )
        length = T // ((d - 1) * levels)
        for segment in range(d - 1):
            for level in range(levels):
                start = (segment * levels + level) * length
                rows = slice(start, start + length)
                features[rows, 0] = (level - gamma_levels) / gamma_levels
                features[rows, segment + 1] = 1.0

    features.setflags(write=False)
    return SegmentedDesign(d=d, T=T, gamma_levels=gamma_levels, features=features)
