import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``; the same key always yields the same stream."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))
