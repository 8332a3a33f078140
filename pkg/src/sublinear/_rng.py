import zlib

import numpy as np


def _key(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def substream(seed, *names):
    """Deterministic child generator for ``seed`` and a path of names/ints.

    Every consumer of randomness derives its own stream so that adding a
    consumer never shifts the draws of another one.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_key(n) for n in names]
    return np.random.default_rng(np.random.SeedSequence(entropy))
