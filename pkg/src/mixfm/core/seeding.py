"""Named random sub-streams derived from a single 64-bit seed.

Every source of randomness (init, shuffle, mixing, split, negatives,
perturbation) draws from its own ``numpy.random.Generator``. Streams are
keyed by name, so adding draws to one stream never shifts another.
"""

import zlib
from typing import Dict

import numpy as np

from mixfm.core.errors import ValidationError


STREAM_NAMES = ('init', 'shuffle', 'mixing', 'split', 'negatives', 'perturb', 'synth', 'moment')


def stream_key(name: str) -> int:
    """Stable integer key for a stream name (independent of PYTHONHASHSEED)."""
    return zlib.crc32(name.encode('utf-8'))


class SeedStreams:
    """Factory of independent, reproducible generators."""

    def __init__(self, seed: int):
        if seed < 0 or seed >= 2 ** 64:
            raise ValidationError(f"Seed must be a non-negative 64-bit integer, got {seed}")
        self.seed = int(seed)
        self._generators: Dict[str, np.random.Generator] = {}

    def fresh(self, name: str) -> np.random.Generator:
        """New generator at the start of the named stream."""
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(stream_key(name),))
        return np.random.Generator(np.random.PCG64(sequence))

    def generator(self, name: str) -> np.random.Generator:
        """Shared generator for the named stream (created on first use)."""
        if name not in self._generators:
            self._generators[name] = self.fresh(name)
        return self._generators[name]

    def child(self, index: int) -> 'SeedStreams':
        """Streams for the index-th repeat of an experiment."""
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(stream_key('repeat'), index))
        return SeedStreams(int(sequence.generate_state(1, dtype=np.uint64)[0]))
