"""Deterministic RNG substream derivation.

Every stochastic component in the package draws from a numpy Generator
derived from an integer seed plus an integer key path, so that results are
reproducible regardless of evaluation order and safe to fan out across
workers.
"""

import numpy as np


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator for the substream identified by (seed, *keys)."""
    return np.random.default_rng(np.random.SeedSequence((int(seed),) + tuple(int(k) for k in keys)))
