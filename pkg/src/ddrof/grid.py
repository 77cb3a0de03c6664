"""Discrete pixel-grid operators for the dual total-variation denoising model.

Images are float64 arrays of shape (rows, cols); dual fields are float64
arrays of shape (rows, cols, 2), channel 0 holding the vertical (row)
component and channel 1 the horizontal (column) component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def sq_norm(a: np.ndarray) -> float:
    """Squared Euclidean norm, accumulated with numpy's pairwise summation."""
    a = np.asarray(a)
    return float(np.sum(a * a))


def zeros_dual(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols, 2))


def as_image(values) -> np.ndarray:
    """Validate and convert to a float64 image array."""
    u = np.asarray(values, dtype=np.float64)
    if u.ndim != 2 or u.shape[0] < 1 or u.shape[1] < 1:
        raise ValueError(f"image must be a nonempty 2-d array, got shape {u.shape}")
    return u


@dataclass(frozen=True)
class RofProblem:
    """Denoising instance: data image f and fidelity weight alpha > 0."""

    f: np.ndarray
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "f", as_image(self.f))
        if not (self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.f.shape


def gradient(u: np.ndarray) -> np.ndarray:
    """Forward-difference gradient; zero on the last row / column."""
    u = np.asarray(u)
    rows, cols = u.shape
    g = np.zeros((rows, cols, 2))
    g[:-1, :, 0] = u[1:, :] - u[:-1, :]
    g[:, :-1, 1] = u[:, 1:] - u[:, :-1]
    return g


def divergence(p: np.ndarray) -> np.ndarray:
    """Discrete divergence, the exact negative adjoint of `gradient`.

    Per component this is the usual three-case backward difference: the
    value itself on the first line, a backward difference in the interior,
    and minus the previous value on the last line.  On a single-line axis
    both indicator ranges are empty and the component contributes nothing,
    which is what adjointness with the zero gradient component requires.
    """
    p = np.asarray(p)
    rows, cols, _ = p.shape
    d = np.zeros((rows, cols))
    d[:-1, :] += p[:-1, :, 0]
    d[1:, :] -= p[:-1, :, 0]
    d[:, :-1] += p[:, :-1, 1]
    d[:, 1:] -= p[:, :-1, 1]
    return d


def project_unit_disk(p: np.ndarray) -> np.ndarray:
    """Euclidean projection onto per-pixel unit disks: scale by 1/max(1, |p_ij|)."""
    p = np.asarray(p)
    mag = np.sqrt(p[..., 0] ** 2 + p[..., 1] ** 2)
    return p / np.maximum(1.0, mag)[..., None]


def dual_energy(p: np.ndarray, prob: RofProblem) -> float:
    """Dual objective 0.5 * ||div p + alpha*f||^2."""
    p = np.asarray(p)
    if p.shape[:2] != prob.shape:
        raise ValueError(f"dual field shape {p.shape[:2]} != image shape {prob.shape}")
    r = divergence(p) + prob.alpha * prob.f
    return 0.5 * sq_norm(r)


def dual_energy_gradient(p: np.ndarray, prob: RofProblem) -> np.ndarray:
    """Gradient of the dual objective: -gradient(div p + alpha*f)."""
    p = np.asarray(p)
    if p.shape[:2] != prob.shape:
        raise ValueError(f"dual field shape {p.shape[:2]} != image shape {prob.shape}")
    return -gradient(divergence(p) + prob.alpha * prob.f)


def recover_primal(p: np.ndarray, prob: RofProblem) -> np.ndarray:
    """Denoised image from a dual field: u = f + div(p) / alpha."""
    p = np.asarray(p)
    if p.shape[:2] != prob.shape:
        raise ValueError(f"dual field shape {p.shape[:2]} != image shape {prob.shape}")
    return prob.f + divergence(p) / prob.alpha


def psnr(u: np.ndarray, reference: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB with peak intensity fixed at 1.

    Returns +inf for identical inputs.
    """
    u = np.asarray(u)
    reference = np.asarray(reference)
    if u.shape != reference.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {reference.shape}")
    err = sq_norm(u - reference)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(u.size / err)
