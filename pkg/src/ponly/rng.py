"""Seeding policy: counter-based Philox streams with explicit derivation.

Every randomized operation takes a 64-bit integer seed and, where a family
of draws is needed (sweep replicates, per-cell backgrounds), a derived
stream key. Derivation goes through ``numpy.random.SeedSequence`` spawn
keys, so parallel replicate generation is reproducible and collision-free
regardless of execution order.
"""

import numpy as np


def make_rng(seed, *stream):
    """Return a ``numpy.random.Generator`` over Philox for (seed, stream).

    ``stream`` is a tuple of nonnegative ints naming a derived substream;
    the same (seed, stream) pair always yields the same generator state.
    """
    if not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {type(seed).__name__}")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def as_rng(seed):
    """Accept either an integer seed or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(seed)
