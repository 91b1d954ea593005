import numpy as np

# Reports embed these so campaigns can be replayed bit for bit
GENERATOR_NAME = "PCG64"
GENERATOR_VERSION = 1


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """
    Seeded generator. Extra integers select an independent sub-stream
    (instance index, partition index, ...).
    """
    sequence = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(s) for s in stream]])
    return np.random.Generator(np.random.PCG64(sequence))


def generator_info(seed: int) -> dict:
    return {
        "name": GENERATOR_NAME,
        "version": GENERATOR_VERSION,
        "seed": int(seed),
    }
