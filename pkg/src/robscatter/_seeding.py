"""Stable seed derivation.

Every random stream in the package is keyed by ``(master_seed, *keys)`` through
:class:`numpy.random.SeedSequence`, whose hashing is platform independent.
"""

import numpy as np

# stream identifiers; never renumber, results depend on them
STREAM_TAU = 1
STREAM_SIGNAL = 2
STREAM_NOISE = 3
STREAM_MIXING = 4
STREAM_TRIAL = 5
STREAM_CHECK = 6


def seed_sequence(seed, *keys):
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))


def derive_seed(seed, *keys):
    """Return a 63-bit integer seed uniquely determined by ``seed`` and ``keys``."""
    state = seed_sequence(seed, *keys).generate_state(1, dtype=np.uint64)[0]
    return int(state >> np.uint64(1))


def rng(seed, *keys):
    return np.random.default_rng(seed_sequence(seed, *keys))
