"""Seed derivation for all stochastic stages.

Every random decision in the toolkit flows from one root seed through
`numpy.random.SeedSequence` spawn keys, backed by the counter-based Philox
generator.  Stage streams are fixed constants so results do not depend on
execution order or parallelism.
"""
from __future__ import annotations

import numpy as np

# stage stream ids (spawn_key prefixes)
STREAM_LOUVAIN = 1
STREAM_KMEANS = 2
STREAM_SYNTH = 3


def rng_from(root_seed: int, *path: int) -> np.random.Generator:
    """Generator for stream `path` under `root_seed`.

    The same (seed, path) pair always yields an identical stream, on any
    machine and regardless of which other streams were drawn first.
    """
    ss = np.random.SeedSequence(entropy=root_seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))
