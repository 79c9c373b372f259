"""Keyed random sub-streams.

Every random draw in a run comes from a generator derived from
``(master_seed, trial_index, purpose)``.  Derivation goes through
:class:`numpy.random.SeedSequence` into a counter-based Philox generator, so a
trial's draws do not depend on which other trials ran, or in which order.
"""

from __future__ import annotations

import zlib

import numpy as np

# Fixed purpose codes; new purposes get a CRC32 of their name.
PURPOSES = {
    "rrh": 1,
    "users": 2,
    "groups": 3,
    "offsets": 4,
    "channel": 5,
    "noise": 6,
    "pattern": 7,
}


def purpose_code(tag: str) -> int:
    try:
        return PURPOSES[tag]
    except KeyError:
        return zlib.crc32(tag.encode()) | (1 << 32)


def substream(master_seed: int, trial: int, purpose: str) -> np.random.Generator:
    """Generator for one ``(trial, purpose)`` pair under ``master_seed``."""
    if master_seed < 0 or trial < 0:
        raise ValueError("seed and trial index must be non-negative")
    seq = np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=(int(trial), purpose_code(purpose))
    )
    return np.random.Generator(np.random.Philox(seq))
