"""Deterministic RNG derivation.

Every stochastic component derives its generator from the pipeline seed plus
a string tag, so adding or reordering components never shifts the streams of
the others.
"""
from __future__ import annotations

import zlib

import numpy as np


def child_rng(seed: int, *tags) -> np.random.Generator:
    """Generator keyed on (seed, tags). Tags may be strings or ints."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for tag in tags:
        if isinstance(tag, str):
            entropy.append(zlib.crc32(tag.encode("utf-8")))
        else:
            entropy.append(int(tag) & 0xFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(entropy))
