"""Per-subdomain dual problems and their inner FISTA solver.

Every local problem minimizes 0.5*||div_s(w*p_s - (w-1)*a_s) + g||^2 over
per-pixel unit disks on one subdomain, where div_s is the zero-extension
divergence onto the extended rectangle.  Weight w = 1 gives the exact block
minimization used by the relaxed Jacobi and Gauss-Seidel sweeps; w = n_colors
with anchor a_s frozen at the outer iterate gives the pre-relaxed block
update, whose assembly is an exact forward-backward step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import (Decomposition, SubdomainView, local_divergence,
                            local_divergence_adjoint)
from .grid import RofProblem, project_unit_disk, sq_norm

MODE_EXACT = "exact"
MODE_PRERELAXED = "prerelaxed"


@dataclass(frozen=True)
class InnerStopRule:
    """Relative change of the local divergence, with an iteration cap."""

    rel_tol: float = 1e-4
    max_iters: int = 50

    def __post_init__(self):
        if not (self.rel_tol > 0):
            raise ValueError("rel_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class LocalProblem:
    """Frozen data of one subdomain solve.

    g lives on the extended rectangle (its diagonal corner entry is zeroed,
    matching the support of the local divergence); anchor is the outer
    iterate restricted to the subdomain, present only for weight > 1.
    """

    view: SubdomainView
    g: np.ndarray
    weight: float = 1.0
    anchor: np.ndarray | None = None

    def __post_init__(self):
        if self.weight < 1.0:
            raise ValueError("relaxation weight must be >= 1")

    def residual(self, ps: np.ndarray) -> np.ndarray:
        if self.weight == 1.0 or self.anchor is None:
            field = ps
        else:
            field = self.weight * ps - (self.weight - 1.0) * self.anchor
        return local_divergence(field, self.view) + self.g

    def objective(self, ps: np.ndarray) -> float:
        return 0.5 * sq_norm(self.residual(ps))

    def objective_gradient(self, ps: np.ndarray) -> np.ndarray:
        return self.weight * local_divergence_adjoint(self.residual(ps), self.view)

    @property
    def lipschitz(self) -> float:
        # ||div_s||^2 <= 8, composed with the weight-w affine substitution
        return 8.0 * self.weight * self.weight


def build_local_problem(q: np.ndarray, prob: RofProblem, dec: Decomposition,
                        view: SubdomainView, mode: str = MODE_EXACT) -> LocalProblem:
    """Assemble one subdomain's local problem from the frozen outer iterate q.

    g is the divergence of q-with-the-subdomain-zeroed plus alpha*f, on the
    extended rectangle; only pixels inside the subdomain's read stencil are
    consulted, so same-colored assemblies touch disjoint data.
    """
    if mode not in (MODE_EXACT, MODE_PRERELAXED):
        raise ValueError(f"unknown local mode {mode!r}")
    r0, r1 = view.row0, view.row1
    c0, c1 = view.col0, view.col1
    er1, ec1 = view.ext_row1, view.ext_col1
    h, w = view.height, view.width
    eh, ew = view.ext_height, view.ext_width

    w1 = q[r0:er1, c0:ec1, 0].copy()
    w2 = q[r0:er1, c0:ec1, 1].copy()
    w1[:h, :w] = 0.0
    w2[:h, :w] = 0.0

    d = np.zeros((eh, ew))
    lim_r = eh if er1 < view.grid_rows else eh - 1
    d[:lim_r] += w1[:lim_r]
    d[1:eh] -= w1[:eh - 1]
    if r0 > 0:
        d[0] -= q[r0 - 1, c0:ec1, 0]
    lim_c = ew if ec1 < view.grid_cols else ew - 1
    d[:, :lim_c] += w2[:, :lim_c]
    d[:, 1:ew] -= w2[:, :ew - 1]
    if c0 > 0:
        d[:, 0] -= q[r0:er1, c0 - 1, 1]

    g = d + prob.alpha * prob.f[r0:er1, c0:ec1]
    if view.has_corner:
        g[h, w] = 0.0

    anchor = q[r0:r1, c0:c1].copy() if mode == MODE_PRERELAXED else None
    weight = float(dec.n_colors) if mode == MODE_PRERELAXED else 1.0
    return LocalProblem(view=view, g=g, weight=weight, anchor=anchor)


def _fista(problem: LocalProblem, init: np.ndarray, stop: InnerStopRule):
    x = project_unit_disk(init)
    start = x
    obj_start = problem.objective(x)
    y = x
    t = 1.0
    div_x = local_divergence(x, problem.view)
    step = 1.0 / problem.lipschitz
    iters = 0
    for _ in range(stop.max_iters):
        x_new = project_unit_disk(y - step * problem.objective_gradient(y))
        iters += 1
        div_new = local_divergence(x_new, problem.view)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, t = x_new, t_new
        change = math.sqrt(sq_norm(div_new - div_x))
        scale = math.sqrt(sq_norm(div_new))
        div_x = div_new
        if scale == 0.0 or change <= stop.rel_tol * scale:
            break
    # monotone safeguard: FISTA may overshoot near the cap; never hand the
    # outer iteration a point worse than its warm start
    if problem.objective(x) > obj_start:
        return start, iters
    return x, iters


def solve_local_exact(problem: LocalProblem, init: np.ndarray,
                      stop: InnerStopRule) -> tuple[np.ndarray, int]:
    """Inner FISTA for the exact block minimization (weight 1).

    Infeasible initials are projected silently.  Returns the solution and
    the number of inner iterations performed.
    """
    if problem.weight != 1.0:
        raise ValueError("exact local solve requires weight == 1")
    return _fista(problem, init, stop)


def solve_local_prerelaxed(problem: LocalProblem, init: np.ndarray,
                           stop: InnerStopRule) -> tuple[np.ndarray, int]:
    """Inner FISTA for the pre-relaxed block problem (weight = color count)."""
    if problem.weight > 1.0 and problem.anchor is None:
        raise ValueError("pre-relaxed local solve requires an anchor")
    return _fista(problem, init, stop)
