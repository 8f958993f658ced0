"""
Seeded random streams for reproducible Monte Carlo work
"""

import numpy as np

MAX_SEED = 2 ** 64


def check_seed(seed: int) -> int:
    """Reject seeds outside the unsigned 64-bit range."""
    seed = int(seed)
    if not 0 <= seed < MAX_SEED:
        raise ValueError(f"Seed must lie in [0, 2**64), got {seed}")
    return seed


def make_rng(seed: int) -> np.random.Generator:
    """Generator for a single seeded computation."""
    return np.random.default_rng(np.random.SeedSequence(check_seed(seed)))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """
    Independent generator for one trial.

    The stream depends only on (seed, trial), so results do not change
    with the number of workers or the order trials are scheduled in.

    Args:
        seed: Experiment seed
        trial: Zero-based trial index

    Returns:
        numpy Generator owned by the trial
    """
    sequence = np.random.SeedSequence(check_seed(seed), spawn_key=(int(trial),))
    return np.random.default_rng(sequence)
