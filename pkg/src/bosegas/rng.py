"""Deterministic RNG plumbing.

Every stochastic operation takes an explicit seed and builds its own
Generator; nothing touches numpy's global state.  Child streams are derived
by hashing (parent seed, tags...) so that sweeps and parallel batches
reproduce one another exactly regardless of scheduling.
"""

import hashlib

import numpy as np


def derive_seed(parent: int, *tags) -> int:
    """Child seed = first 8 bytes of sha256(repr((parent, tags)))."""
    payload = repr((int(parent),) + tuple(tags)).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))
