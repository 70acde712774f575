"""Seed-stream plumbing: one root seed, per-task substreams via SeedSequence.spawn."""

from __future__ import annotations

import numpy as np

Seed = int | np.random.SeedSequence


def seed_sequence(seed: Seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def spawn(seed: Seed, n: int) -> list[np.random.SeedSequence]:
    """n child streams; child i is identical no matter how many siblings follow.

    Children are keyed by index only, so repeated calls on the same seed
    return the same streams (unlike SeedSequence.spawn, which counts).
    """
    ss = seed_sequence(seed)
    return [
        np.random.SeedSequence(entropy=ss.entropy, spawn_key=ss.spawn_key + (i,))
        for i in range(n)
    ]


def generator(seed: Seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(seed)))
