"""Seeded random streams.

Every random choice in the package is drawn from a Philox generator keyed by
a single 64-bit seed plus a stream path, so independent consumers never share
state and parallel workers reproduce sequential runs exactly.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(stream))
    return np.random.Generator(np.random.Philox(ss))


# stream identifiers
PARTITION = 1
EXPANSION_PROBES = 2
