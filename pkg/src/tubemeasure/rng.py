"""Seeded random streams with independent substreams for parallel workers.

A substream seed is derived from ``(seed, stream)`` with two rounds of the
splitmix64 finaliser and fed to numpy's PCG64, so a given pair always yields
the same sequence regardless of how many workers run or in which order.
"""

from dataclasses import dataclass, field

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def substream_seed(seed: int, stream: int) -> int:
    return splitmix64(splitmix64(seed & _MASK) ^ (stream & _MASK))


@dataclass
class RandomStream:
    seed: int = 0
    stream: int = 0
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.generator = np.random.Generator(np.random.PCG64(substream_seed(self.seed, self.stream)))

    def substream(self, index: int) -> "RandomStream":
        """Independent child stream; children of distinct indices never collide
        with each other for a fixed parent."""
        return RandomStream(substream_seed(self.seed, self.stream), index)


def as_stream(rng) -> RandomStream:
    if isinstance(rng, RandomStream):
        return rng
    return RandomStream(int(rng))
