"""
Interface shared by every online predictor
"""

from typing import Optional, Protocol, runtime_checkable

from core.logistic import ParamVector, RegretTrace, SequenceLike


@runtime_checkable
class OnlineAlgorithm(Protocol):
    """Anything that can be run over a sequence and scored against a comparator."""

    name: str

    def run(
        self,
        sequence: SequenceLike,
        comparator: Optional[ParamVector] = None,
    ) -> RegretTrace:
        """Predict each label before seeing it and return the regret trace."""
        ...
