"""Seed plumbing helpers: every sampling entry point accepts the same forms."""

from __future__ import annotations

import numpy as np

SeedLike = "int | np.random.SeedSequence | np.random.Generator"


def as_generator(seed) -> np.random.Generator:
    """Coerce an int, SeedSequence or Generator into a Generator (PCG64)."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def spawn_seed(root: int, *path: int) -> np.random.SeedSequence:
    """Deterministic child seed identified by a path of integers."""
    return np.random.SeedSequence(entropy=int(root), spawn_key=tuple(int(p) for p in path))


def split_seeds(seed, k: int) -> list[np.random.SeedSequence]:
    """k child seeds; stable when called once per fresh seed object."""
    if isinstance(seed, np.random.SeedSequence):
        return seed.spawn(k)
    return np.random.SeedSequence(int(seed)).spawn(k)
