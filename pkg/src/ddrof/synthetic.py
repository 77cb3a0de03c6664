"""Deterministic synthetic test images.

The classical benchmark photographs are not redistributable, so the repo
ships piecewise-constant scenes with a lightly textured region instead;
shapes scale with the requested size.
"""

from __future__ import annotations

import numpy as np


def synthetic_image(rows: int, cols: int, seed: int = 0) -> np.ndarray:
    """Piecewise-constant shapes plus a smooth textured patch, values in [0, 1]."""
    if rows < 1 or cols < 1:
        raise ValueError("image dimensions must be positive")
    u = np.full((rows, cols), 0.25)
    ii, jj = np.mgrid[0:rows, 0:cols]
    ri = ii / max(rows - 1, 1)
    rj = jj / max(cols - 1, 1)

    # edges deliberately avoid low-denominator fractions of the image size,
    # so subdomain interface lines never ride along a shape boundary
    u[(ri >= 0.16) & (ri < 0.59) & (rj >= 0.09) & (rj < 0.44)] = 0.70
    u[(ri >= 0.07) & (ri < 0.21) & (rj >= 0.57) & (rj < 0.93)] = 0.45
    disk = (ri - 0.68) ** 2 + (rj - 0.70) ** 2 < 0.140 ** 2
    u[disk] = 0.95
    hole = (ri - 0.68) ** 2 + (rj - 0.70) ** 2 < 0.080 ** 2
    u[hole] = 0.10
    band = np.abs((ri - 0.84) + 0.37 * (rj - 0.2)) < 0.045
    u[band] = 0.55

    rng = np.random.Generator(np.random.Philox(seed))
    tex = rng.normal(0.0, 1.0, (rows, cols))
    for _ in range(2):  # two box-blur passes calm the texture to low frequency
        smoothed = tex.copy()
        smoothed[1:, :] += tex[:-1, :]
        smoothed[:-1, :] += tex[1:, :]
        smoothed[:, 1:] += tex[:, :-1]
        smoothed[:, :-1] += tex[:, 1:]
        tex = smoothed / 5.0
    patch = (ri >= 0.62) & (rj < 0.40)
    u[patch] += 0.05 * tex[patch]
    return np.clip(u, 0.0, 1.0)
