from dataclasses import dataclass
from typing import Iterator

import numpy as np

# Purpose offsets inside one replication; keeps streams disjoint per use.
NOISE_STREAM = 0
EXPLORATION_STREAM = 1
PERTURBATION_STREAM = 2
STREAMS_PER_REPLICATION = 4

_BATCH = 1024


@dataclass(frozen=True)
class RngSpec:
    """Value-type handle for one reproducible random stream.

    ``(master_seed, stream_index)`` fully determines the sequence: the pair is
    fed to ``numpy.random.SeedSequence`` as entropy and spawn key, which gives
    statistically independent PCG64 streams for distinct indices.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.master_seed < 0 or self.stream_index < 0:
            raise ValueError("master_seed and stream_index must be non-negative")

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_index,))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def child_generator(self, index: int) -> np.random.Generator:
        """Generator for the ``index``-th child of this stream (Monte-Carlo reps)."""
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_index, index))
        return np.random.Generator(np.random.PCG64(seq))

    @classmethod
    def for_replication(cls, master_seed: int, replication: int, purpose: int) -> "RngSpec":
        return cls(master_seed, replication * STREAMS_PER_REPLICATION + purpose)


def gaussian_stream(spec: RngSpec) -> Iterator[float]:
    generator = spec.generator()
    while True:
        yield from generator.standard_normal(_BATCH).tolist()


def gaussian_draws(spec: RngSpec, size) -> np.ndarray:
    return spec.generator().standard_normal(size)
