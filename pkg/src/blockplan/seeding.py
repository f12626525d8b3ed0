"""Deterministic seed derivation.

Every stochastic operation in the library takes an explicit seed. Seeds for
nested work units (beam / step / branch / control index) are derived from the
root seed plus the unit's indices, never from call order, so results are
identical under any execution interleaving.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

SeedLike = int | Iterable[int]


def seed_tuple(seed: SeedLike) -> tuple[int, ...]:
    """Normalize a seed to a tuple of non-negative ints."""
    if isinstance(seed, (int, np.integer)):
        tags = (int(seed),)
    else:
        tags = tuple(int(t) for t in seed)
    if any(t < 0 for t in tags):
        raise ValueError(f"seed components must be non-negative, got {tags}")
    return tags


def derive(seed: SeedLike, *indices: int) -> tuple[int, ...]:
    """Extend a seed with work-unit indices, yielding a new seed."""
    return seed_tuple(seed) + tuple(int(i) for i in indices)


def rng_from(seed: SeedLike) -> np.random.Generator:
    """Build a generator from a (possibly composite) seed."""
    return np.random.default_rng(np.random.SeedSequence(list(seed_tuple(seed))))
