"""Seedable, splittable random-number source.

Every stochastic routine in the package draws from a ``numpy.random.Generator``
obtained through a :class:`RandomSource`.  A source is a value (seed, stream)
pair; it owns no mutable state, so identical pairs reproduce identical draw
sequences on any platform, and distinct streams are statistically independent.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["RandomSource"]


@dataclass(frozen=True)
class RandomSource:
    """Value-semantic handle for a reproducible random stream.

    ``generator()`` builds a fresh PCG64 generator keyed on (seed, stream).
    Replicate r of a simulation should use ``source.stream(r)`` so replicates
    are independent yet individually reproducible.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2 ** 64):
            raise ValueError("seed must fit in 64 unsigned bits")
        if not (0 <= int(self.stream_id) < 2 ** 64):
            raise ValueError("stream_id must fit in 64 unsigned bits")

    def generator(self) -> np.random.Generator:
        """A fresh generator; repeated calls restart the same sequence."""
        ss = np.random.SeedSequence(entropy=int(self.seed),
                                    spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))

    def stream(self, stream_id: int) -> "RandomSource":
        """Sibling source on a different stream of the same seed."""
        return RandomSource(self.seed, stream_id)
