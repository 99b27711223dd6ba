"""Counter-based random streams.

Every random draw in the package goes through :func:`make_rng`, so a seed fully
determines a replicate regardless of how many worker threads are used.
"""

import numpy as np

DESIGN_STREAM = 0
NOISE_STREAM = 1


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for ``seed`` and an optional stream path."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, *stream: int) -> int:
    """Integer seed of a child stream (e.g. replicate ``r`` of a master seed)."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
