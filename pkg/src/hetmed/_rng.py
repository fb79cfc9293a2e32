"""Named, seeded random substreams.

Every random draw in the package comes from ``substream(seed, *keys)``, so a
result depends only on the seed and the logical position of the draw, not on
execution order or the number of workers.
"""

import zlib

import numpy as np


def _key(k):
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    k = int(k)
    if k < 0:
        raise ValueError("substream keys must be non-negative")
    return k


def substream(seed: int, *keys) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``; keys are ints or names."""
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *map(_key, keys)])))
