"""Counter-based random substreams for reproducible, order-independent campaigns.

Every Monte-Carlo unit of work (a grid cell, a trial block) draws from its own
generator derived from (campaign seed, *key). Streams for distinct keys are
independent, and results do not depend on scheduling order or worker count.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream"]


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream identified by `key` under `seed`.

    Same (seed, key) -> identical stream; different keys -> independent
    streams (SeedSequence spawn-key domain separation). Key components are
    reduced mod 2^32 so negative ids are usable.
    """
    ss = np.random.SeedSequence(
        entropy=int(seed) % (1 << 128),
        spawn_key=tuple(int(k) % (1 << 32) for k in key),
    )
    return np.random.Generator(np.random.Philox(ss))
