# src/montecarlo/rng.py
"""
Counter-based random streams. Every subsystem draws from
PCG64(SeedSequence(seed, spawn_key=(stream, run, index))), so a batch's
numbers depend only on its own key and never on scheduling.
"""
import numpy as np
from numpy.random import PCG64, SeedSequence

STREAM_BATCH = 1
STREAM_MISALIGNMENT = 2
STREAM_PHASE_DRIFT = 3
STREAM_FIT = 4

_SEED_MASK = (1 << 64) - 1


def generator_for(seed: int, stream: int, *counters: int) -> np.random.Generator:
    key = (int(stream),) + tuple(int(c) for c in counters)
    return np.random.Generator(PCG64(SeedSequence(int(seed) & _SEED_MASK, spawn_key=key)))


def batch_generator(seed: int, run: int, batch: int) -> np.random.Generator:
    return generator_for(seed, STREAM_BATCH, run, batch)
