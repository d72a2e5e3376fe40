"""
Seed derivation

All randomness flows from one root seed. Each subsystem gets its own
stream through a stable string label, so adding a new consumer never
shifts the draws of an existing one.
"""

import hashlib

import numpy as np


SEED_MASK = (1 << 63) - 1


def derive_seed(root_seed: int, label: str) -> int:
    """Stable 63-bit sub-seed for (root_seed, label)"""
    digest = hashlib.md5(f"{int(root_seed)}:{label}".encode()).hexdigest()
    return int(digest[:16], 16) & SEED_MASK


def generator_for(root_seed: int, label: str) -> np.random.Generator:
    """PCG64 generator for a labelled subsystem"""
    return np.random.default_rng(derive_seed(root_seed, label))


def counter_generator(seed: int, block: int = 0) -> np.random.Generator:
    """
    Counter-based (Philox) generator positioned at a draw block

    Block b starts b Philox jumps (2**128 steps each) into the stream, so blocks never overlap and
    block contents depend only on (seed, block), not on which thread asks.
    """
    bit_generator = np.random.Philox(key=int(seed) & SEED_MASK)
    if block:
        bit_generator = bit_generator.jumped(block)
    return np.random.Generator(bit_generator)
