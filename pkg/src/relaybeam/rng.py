"""Counter-based random substreams.

Every random quantity in a run is drawn from a Philox generator keyed by
``(master_seed, *key)``. Trials therefore do not depend on execution order or
on how work is split between workers.
"""

import numpy as np

# stream purposes, used as the last element of a key
CHANNEL = 0
RANDOM_SELECTION = 1
SNAPSHOTS = 2
TRANSMIT = 3


def substream(master_seed: int, *key: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def mask_code(mask) -> int:
    """Integer whose binary digits are the 0/1 mask (relay 0 is the lowest bit)."""
    return sum(1 << i for i, a in enumerate(mask) if a)
