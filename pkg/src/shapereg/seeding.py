"""Stable derivation of independent random streams.

A stream is identified by ``(seed, n, replicate, role)``; the role string is
reduced with CRC-32 so that the mapping does not depend on ``PYTHONHASHSEED``.
"""
import zlib

import numpy as np


def role_key(role: str) -> int:
    return zlib.crc32(role.encode("utf-8"))


def derive_seed(seed: int, n: int = 0, replicate: int = 0, role: str = "") -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(n), int(replicate), role_key(role)])


def rng_for(seed, n: int = 0, replicate: int = 0, role: str = "") -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, n, replicate, role))


def as_generator(seed) -> np.random.Generator:
    """Accept an int, a SeedSequence or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
