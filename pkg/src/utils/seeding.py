"""Seeded random streams.

Every consumer of randomness draws from its own stream, keyed by the run seed,
a fixed stream tag and an optional key (usually a node id). Adding draws to one
stream therefore never shifts another.
"""

import numpy as np

STREAM_DEPLOY = 1
STREAM_PR_ACTIVITY = 2
STREAM_PR_DATA = 3
STREAM_STRATEGY = 4
STREAM_INJECTION = 5
STREAM_MOBILITY = 6


def stream(seed: int, tag: int, *key: int) -> np.random.Generator:
    """Generator for (seed, tag, key...)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(tag), *map(int, key)]))


def replication_seed(master_seed: int, replication: int) -> int:
    """Seed of replication r: a pure function of (master seed, r)."""
    state = np.random.SeedSequence([int(master_seed), int(replication)]).generate_state(1)
    return int(state[0])
