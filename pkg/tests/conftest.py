"""
Shared fixtures for the regretlab tests
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from core.logistic import LabeledSequence  # noqa: E402


def ones_sequence(labels) -> LabeledSequence:
    """d = 1 sequence with x_t = 1 and the given labels."""
    labels = np.asarray(labels)
    return LabeledSequence(np.ones((len(labels), 1)), labels)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_sequence_2d(rng):
    """Random d = 2, T = 20 sequence with features in [-1, 1]^2."""
    features = rng.uniform(-1.0, 1.0, size=(20, 2))
    labels = rng.choice([-1, 1], size=20)
    return LabeledSequence(features, labels)
