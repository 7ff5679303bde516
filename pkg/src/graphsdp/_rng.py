"""Seeded, splittable random streams.

Every stochastic routine takes an integer seed and derives independent
substreams through ``SeedSequence`` spawn keys, so replicate-level
parallelism never correlates and results are bit-reproducible across runs.
"""

from __future__ import annotations

import numpy as np

# Fixed substream indices; never renumber, files produced with one layout
# must reload identically.
STREAM_EDGES = 0      # Bernoulli edge indicators B_ij
STREAM_MASK = 1       # sampling/mask indicators s_ij
STREAM_NOISE = 2      # Gaussian or outlier offsets g_ij
STREAM_PHASES = 3     # ground-truth angles
STREAM_SOLVER = 4     # solver-internal randomness (restarts, rounding)


def seed_sequence(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key...)."""
    return np.random.default_rng(seed_sequence(seed, *key))


def cell_seed_sequence(master_seed: int, grid_index: int, replicate: int) -> np.random.SeedSequence:
    """Stable per-cell stream for experiment grids.

    Keyed by (grid index, replicate) so extending a grid or adding
    replicates never perturbs existing cells.
    """
    return seed_sequence(master_seed, grid_index, replicate)
