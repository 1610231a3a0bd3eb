"""Deterministic RNG streams for Monte-Carlo experiments.

Every trial draws from its own generator derived from (seed, *path), so the
result of trial ``i`` never depends on how many trials run, their order, or
the thread that executes them.
"""

from __future__ import annotations

import numpy as np

_U64 = 0xFFFFFFFFFFFFFFFF


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for one (seed, *path) coordinate.

    Seeds may be any 64-bit value; negative seeds are mapped to their
    unsigned two's-complement representation.
    """
    entropy = [int(seed) & _U64] + [int(p) & _U64 for p in path]
    return np.random.default_rng(entropy)
