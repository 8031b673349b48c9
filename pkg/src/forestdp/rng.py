"""Seeded, splittable random streams.

Every randomized routine takes an explicit :class:`numpy.random.Generator`.
Streams are backed by the counter-based Philox bit generator; children are
derived with ``SeedSequence.spawn`` so sibling streams never overlap.
"""

from __future__ import annotations

import numpy as np


def make_stream(seed: int | np.random.SeedSequence | None = 0) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def split(rng: np.random.Generator, k: int) -> list[np.random.Generator]:
    """Derive ``k`` independent child streams from ``rng``."""
    return rng.spawn(k)


def as_stream(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_stream(rng)
