"""Deterministic RNG substream derivation.

Every stochastic component consumes a stream derived from (master seed,
component path), so a run is replayable from its master seed alone and
results do not depend on how work is batched or distributed.
"""

from __future__ import annotations

import random

import numpy as np

# Component namespaces for spawn keys; keep values stable across releases.
NS_AP_SAMPLE = 1
NS_MC_EVAL = 2
NS_RR1 = 3
NS_RR2 = 4
NS_CHI = 5
NS_SELECT = 6
NS_LOCAL_RR = 7


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """A PCG64 generator keyed by (master_seed, *path)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=tuple(path))))


def child_seed(master_seed: int, *path: int) -> int:
    """A 64-bit integer seed keyed by (master_seed, *path)."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])


def python_rand(master_seed: int, *path: int) -> random.Random:
    """A stdlib Random keyed by (master_seed, *path); used in scalar-heavy loops."""
    return random.Random(child_seed(master_seed, *path))


def entropy_of(rng: "int | np.random.Generator") -> int:
    """Collapse an int seed or a Generator into a single base entropy value.

    Drawing one word from a Generator keeps the caller's stream position
    moving, so repeated calls yield independent entropies.
    """
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    return int(rng.integers(0, 2**63))
