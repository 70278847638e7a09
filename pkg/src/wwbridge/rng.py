"""Counter-based random streams keyed by (seed, replicate, stream tag).

Every replicate owns a Philox generator derived from its id alone, so the
numbers it sees never depend on scheduling or on how many workers run.
"""

from __future__ import annotations

import numpy as np

GAUSSIAN = 0
DIGITS = 1


def stream(seed: int, replicate_id: int, tag: int = GAUSSIAN) -> np.random.Generator:
    if seed < 0 or replicate_id < 0:
        raise ValueError("seed and replicate_id must be nonnegative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replicate_id), int(tag)))
    return np.random.Generator(np.random.Philox(ss))
