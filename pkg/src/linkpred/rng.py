"""Named deterministic random streams.

All randomness in the package flows from a single integer seed. Each stage
(splitting, negative sampling, parameter init, shuffling, ...) draws from its
own stream derived from (seed, purpose-tag, indices), so a change in how much
randomness one stage consumes never perturbs any other stage.
"""
from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, purpose: str, *key: int) -> np.random.Generator:
    """Generator for a named purpose, optionally indexed (e.g. by trial)."""
    tag = zlib.crc32(purpose.encode("utf-8"))
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(tag, *(int(k) for k in key)))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(seed: int | np.random.Generator) -> np.random.Generator:
    """Accept either a raw seed or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
