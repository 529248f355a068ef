"""Named random streams.

Every random draw in the package comes from a stream keyed by
``(master seed, *indices)`` via :class:`numpy.random.SeedSequence` spawn keys,
so any unit of work can be replayed in isolation and in any order.
"""

from __future__ import annotations

import numpy as np

# purposes, used as the first spawn-key component
SAMPLE_VERTICES = 0
EST_CLIP = 1
LOCAL_SEARCH = 2
TRIAL = 3
MINOR_HEURISTIC = 4


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) % (2**63), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *key: int) -> int:
    """A 63-bit integer seed for sub-unit ``key`` of ``seed``."""
    ss = np.random.SeedSequence(int(seed) % (2**63), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
