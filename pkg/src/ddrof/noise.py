"""Seeded Gaussian noise injection.

Uses numpy's Philox counter-based generator so that a (seed, shape) pair
produces the same corrupted image on every platform and run.
"""

from __future__ import annotations

import math

import numpy as np


def add_gaussian_noise(u: np.ndarray, variance: float, seed: int) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise of the given variance; no clamping."""
    if variance < 0:
        raise ValueError(f"variance must be nonnegative, got {variance}")
    u = np.asarray(u, dtype=np.float64)
    if variance == 0:
        return u.copy()
    rng = np.random.Generator(np.random.Philox(seed))
    return u + rng.normal(0.0, math.sqrt(variance), u.shape)
