"""Deterministic randomness for trials and orbit sampling.

Each trial gets its own counter-based Philox stream keyed by
``seed XOR trial_index``, so trial i is reproducible in isolation and
the whole run is order-independent.  The identifier string below is
embedded in reports so a witness can name the exact derivation.
"""

from __future__ import annotations

import math

import numpy as np

PRNG_ID = "philox4x64(key = seed xor trial)"

_MASK64 = 0xFFFFFFFFFFFFFFFF


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial of a seeded run."""
    return np.random.Generator(np.random.Philox(key=(seed ^ trial) & _MASK64))


def log_uniform(rng: np.random.Generator, lo: float, hi: float, size=None):
    """Draw from [lo, hi] uniformly in log space.  Requires 0 < lo <= hi."""
    if not (0.0 < lo <= hi):
        raise ValueError(f"log_uniform needs 0 < lo <= hi, got [{lo}, {hi}]")
    if lo == hi:
        return lo if size is None else np.full(size, lo)
    draw = rng.uniform(math.log(lo), math.log(hi), size)
    return np.exp(draw)
