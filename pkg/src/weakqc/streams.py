"""Seeded random streams.

Every stochastic routine takes an explicit :class:`numpy.random.Generator`.
Parallel work splits one seed into independent child streams through
:class:`numpy.random.SeedSequence`, so results depend only on
``(seed, partition)`` and never on scheduling.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def substreams(seed, count: int) -> list[np.random.Generator]:
    """``count`` independent generators derived deterministically from ``seed``."""
    if isinstance(seed, np.random.Generator):
        return list(seed.spawn(count))
    if isinstance(seed, np.random.SeedSequence):
        return [np.random.default_rng(s) for s in seed.spawn(count)]
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]
