"""
Random streams for the engines

Every run draws from a PCG64 generator seeded by a SeedSequence built from
(seed, grid index, replicate). Streams are stable within one numpy build;
stability across numpy versions is not promised.
"""

import numpy as np

BIT_GENERATOR = "PCG64"


def seed_sequence(seed: int, grid_index: int = 0, replicate: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(int(grid_index), int(replicate)))


def make_generator(seed: int, grid_index: int = 0, replicate: int = 0) -> np.random.Generator:
    """Generator for run (grid_index, replicate) under master seed `seed`"""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, grid_index, replicate)))


def derive_run_seed(master_seed: int, grid_index: int, replicate: int) -> int:
    """64-bit seed recorded for one sweep cell; reruns with `make_generator(seed)`"""
    state = seed_sequence(master_seed, grid_index, replicate).generate_state(1, np.uint64)
    return int(state[0])
