"""Deterministic seed derivation shared across modules.

Every stochastic component derives its generator from a root seed plus a fixed
integer path, so reruns with the same configuration reproduce bit-identical
streams regardless of evaluation order.
"""
from __future__ import annotations

import numpy as np

SeedLike = "int | np.random.SeedSequence"


def subseed(root, *path: int) -> np.random.SeedSequence:
    """Child seed sequence at a fixed path below a root seed.

    The root may itself be a SeedSequence, in which case the path extends its
    spawn key, so derivations compose: subseed(subseed(s, a), b) ==
    subseed(s, a, b).
    """
    key = tuple(int(p) for p in path)
    if isinstance(root, np.random.SeedSequence):
        return np.random.SeedSequence(root.entropy, spawn_key=tuple(root.spawn_key) + key)
    return np.random.SeedSequence(int(root), spawn_key=key)


def rng_at(root, *path: int) -> np.random.Generator:
    """Generator seeded at a fixed path below a root seed."""
    return np.random.default_rng(subseed(root, *path))


def as_generator(seed) -> np.random.Generator:
    """Accept an int, SeedSequence, or Generator and return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
