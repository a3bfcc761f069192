"""Counter-based RNG stream derivation.

A master seed expands into independent streams addressed by
``(instance, repeat, stage)`` so that two arms of an experiment using the
same addresses see the same randomness, and reruns are exact.
"""

from typing import Union

import numpy as np

# Stage identifiers; their numeric values are part of the output contract.
STAGE_GRAPH = 0
STAGE_SOURCE = 1
STAGE_ENCODE = 2
STAGE_CHANNEL = 3
STAGE_ORDER = 4

SeedLike = Union[int, np.random.Generator, None]


def derive_rng(
    master_seed: int, instance: int = 0, repeat: int = 0, stage: int = 0
) -> np.random.Generator:
    """Return the generator for one address under ``master_seed``.

    Raises:
        ValueError: If the seed or any address component is negative.
    """
    if master_seed < 0 or instance < 0 or repeat < 0 or stage < 0:
        raise ValueError(
            f"Seeds and stream addresses must be non-negative, got "
            f"({master_seed!r}, {instance!r}, {repeat!r}, {stage!r})"
        )
    seq = np.random.SeedSequence(
        entropy=master_seed, spawn_key=(instance, repeat, stage)
    )
    return np.random.default_rng(seq)


def as_rng(seed: SeedLike) -> np.random.Generator:
    """Accept an int seed, an existing generator, or None."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
