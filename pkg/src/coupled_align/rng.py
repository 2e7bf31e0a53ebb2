"""Named random streams derived from a single 64-bit seed.

Every consumer asks for ``stream(seed, "name")``; the name is hashed with
CRC32 and mixed into a :class:`numpy.random.SeedSequence`, so streams for
different consumers are independent and adding a consumer never shifts the
numbers another consumer sees.
"""

import zlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def stream(seed: int, name: str) -> np.random.Generator:
    key = zlib.crc32(name.encode("utf-8"))
    ss = np.random.SeedSequence([int(seed) & SEED_MASK, key])
    return np.random.Generator(np.random.PCG64(ss))
