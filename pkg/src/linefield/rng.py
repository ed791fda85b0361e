"""Deterministic RNG streams.

Every randomized routine takes an integer seed and derives independent
child streams from (seed, *key) so that results are reproducible and
sample i never depends on how samples 0..i-1 were consumed elsewhere.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    """Child generator for a (seed, key...) path."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def complex_uniform(rng: np.random.Generator, lo: complex, hi: complex, n: int) -> np.ndarray:
    """n points uniform on the axis-aligned box [lo.re,hi.re] x [lo.im,hi.im]."""
    re = rng.uniform(lo.real, hi.real, n)
    im = rng.uniform(lo.imag, hi.imag, n)
    return re + 1j * im
