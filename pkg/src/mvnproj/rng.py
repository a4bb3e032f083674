"""Seedable, splittable random streams."""

from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass
class RngStream:
    """A random stream fully determined by ``(master_seed, stream_index)``.

    Replication ``i`` of any Monte Carlo study uses ``stream_index = i``.
    The underlying bit generator is PCG64 (period 2**128) seeded through
    ``SeedSequence(master_seed, spawn_key=(stream_index,))``, so distinct
    index pairs give independent sequences.

    A stream carries mutable generator state and must not be shared
    between threads.
    """

    master_seed: int
    stream_index: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.master_seed = int(self.master_seed) & _MASK64
        self.stream_index = int(self.stream_index) & _MASK64
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def uniform(self, size):
        """Uniform draws on the open interval (0, 1)."""
        bits = self._gen.integers(0, 1 << 53, size=size, dtype=np.int64)
        return (bits + 0.5) * 2.0**-53

    def standard_normal(self, size):
        """Standard normal deviates by inversion of uniforms."""
        from .special import normal_quantile

        return normal_quantile(self.uniform(size))


def replication_streams(master_seed, start, stop):
    """Streams for replications ``start .. stop-1``."""
    return [RngStream(master_seed, i) for i in range(start, stop)]
