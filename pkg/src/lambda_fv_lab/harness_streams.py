"""Keyed random streams.

Every stochastic routine in the package draws from a generator derived
here.  Streams are keyed by (master seed, replicate, role), so replicate
scheduling or role reordering can never change what a given consumer sees.
"""

from __future__ import annotations

import zlib

import numpy as np

from .errors import OutOfRange

# Fixed role registry: the numeric key of a role is stable across versions.
ROLES = {
    "coalescent_clocks": 1,
    "merge_choice": 2,
    "brownian": 3,
    "init_positions": 4,
    "subset_choice": 5,
    "tm_chain": 6,
    "urn_chain": 7,
    "urn_exponentials": 8,
    "analysis": 9,
    "event_times": 10,
    "snapshots": 11,
    "envelope": 12,
    "bridge": 13,
    "tail_paths": 14,
    "mass_sample": 15,
}


def role_id(role: str) -> int:
    """Stable numeric id of a role; unknown names hash into high ids."""
    got = ROLES.get(role)
    if got is not None:
        return got
    return 1000 + zlib.crc32(role.encode("utf-8"))


def stream_for(master_seed: int, replicate: int,
               role: str) -> np.random.Generator:
    """Independent, reproducible generator keyed by (seed, replicate, role)."""
    if replicate < 0:
        raise OutOfRange("replicate must be nonnegative")
    seq = np.random.SeedSequence(entropy=int(master_seed) & (2 ** 64 - 1),
                                 spawn_key=(int(replicate), role_id(role)))
    return np.random.Generator(np.random.Philox(seq))
