"""Outer iterations: block Jacobi variants, block Gauss-Seidel, full-grid FISTA.

All methods drive the same dual objective.  Per-color local solves are
independent and may run on a thread pool; assembly always happens in fixed
subdomain order from the driver thread, so traces are identical for any
thread count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .decomposition import Decomposition, bregman_distance, interface_penalty_constant
from .grid import (RofProblem, dual_energy, gradient, divergence,
                   project_unit_disk, zeros_dual)
from .local_solver import (InnerStopRule, MODE_EXACT, MODE_PRERELAXED,
                           build_local_problem, solve_local_exact,
                           solve_local_prerelaxed)


class NumericalError(RuntimeError):
    """Raised when an iteration produces a non-finite energy."""


@dataclass
class SolverConfig:
    """Outer-iteration controls.

    gap_tol stops on (F(p) - F*)/F* < gap_tol and requires oracle_energy;
    change_tol stops on the relative energy change between outer iterations
    (the fallback when no oracle energy is known).  max_outer always caps.
    """

    gap_tol: float | None = None
    change_tol: float | None = None
    max_outer: int = 500
    inner: InnerStopRule = field(default_factory=InnerStopRule)
    oracle_energy: float | None = None
    threads: int = 1
    collect_timing: bool = True

    def validate(self):
        if self.gap_tol is not None and self.oracle_energy is None:
            raise ValueError("gap-based stopping requires oracle_energy")
        if self.gap_tol is not None and not self.gap_tol > 0:
            raise ValueError("gap_tol must be positive")
        if self.change_tol is not None and not self.change_tol > 0:
            raise ValueError("change_tol must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass
class SolverTrace:
    """Per-outer-iteration diagnostics; row 0 describes the initial iterate."""

    method: str
    energies: list[float] = field(default_factory=list)
    gaps: list[float | None] = field(default_factory=list)
    wall_ms: list[float] = field(default_factory=list)
    inner_iters: list[list[int]] = field(default_factory=list)
    momentum: list[float] | None = None
    color_energies: list[list[float]] | None = None
    psnr: float | None = None

    @property
    def n_iterations(self) -> int:
        return len(self.energies) - 1

    def total_wall_ms(self) -> float:
        return float(sum(self.wall_ms))

    def iterations_to_gap(self, tol: float) -> int | None:
        """First iteration whose relative gap is below tol, if any."""
        for n, gap in enumerate(self.gaps):
            if gap is not None and gap < tol:
                return n
        return None


def _init_dual(init, rows, cols) -> np.ndarray:
    if init is None:
        return zeros_dual(rows, cols)
    p = np.array(init, dtype=np.float64)
    if p.shape != (rows, cols, 2):
        raise ValueError(f"initial dual field shape {p.shape} != {(rows, cols, 2)}")
    return p


class _Driver:
    """Shared bookkeeping: trace rows, stopping tests, worker pool."""

    def __init__(self, method: str, prob: RofProblem, cfg: SolverConfig):
        cfg.validate()
        self.prob = prob
        self.cfg = cfg
        self.trace = SolverTrace(method=method)
        self.pool = ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    def map(self, fn, items):
        if self.pool is None:
            return [fn(item) for item in items]
        return list(self.pool.map(fn, items))

    def record(self, p: np.ndarray, wall_ms: float, inner: list[int]) -> float:
        energy = dual_energy(p, self.prob)
        if not math.isfinite(energy):
            raise NumericalError(f"non-finite energy at outer iteration "
                                 f"{len(self.trace.energies)}")
        gap = None
        if self.cfg.oracle_energy is not None and self.cfg.oracle_energy > 0:
            gap = (energy - self.cfg.oracle_energy) / self.cfg.oracle_energy
        self.trace.energies.append(energy)
        self.trace.gaps.append(gap)
        self.trace.wall_ms.append(wall_ms)
        self.trace.inner_iters.append(inner)
        return energy

    def done(self) -> bool:
        cfg, tr = self.cfg, self.trace
        if cfg.gap_tol is not None and tr.gaps[-1] is not None and tr.gaps[-1] < cfg.gap_tol:
            return True
        if cfg.change_tol is not None and len(tr.energies) >= 2:
            prev, cur = tr.energies[-2], tr.energies[-1]
            if prev > 0 and abs(cur - prev) / prev < cfg.change_tol:
                return True
            if prev == 0.0:
                return True
        return False

    def tick(self) -> float:
        return time.perf_counter() if self.cfg.collect_timing else 0.0

    def tock(self, t0: float) -> float:
        return (time.perf_counter() - t0) * 1e3 if self.cfg.collect_timing else 0.0


def _local_pass(drv: _Driver, dec: Decomposition, views, q: np.ndarray,
                warm: list, mode: str):
    """Solve the local problems for the given views against the frozen q."""
    solve = solve_local_exact if mode == MODE_EXACT else solve_local_prerelaxed

    def task(view):
        lp = build_local_problem(q, drv.prob, dec, view, mode=mode)
        init = warm[view.index]
        if init is None:
            rs, cs = view.owner_slices
            init = q[rs, cs]
        return solve(lp, init, drv.cfg.inner)

    results = drv.map(task, views)
    for view, (ps, _) in zip(views, results):
        warm[view.index] = ps
    return results


def relaxed_jacobi(prob: RofProblem, dec: Decomposition, cfg: SolverConfig,
                   init: np.ndarray | None = None) -> tuple[np.ndarray, SolverTrace]:
    """Average of exact per-color block solves with the previous iterate.

    Each outer step replaces p by (1 - 1/n_colors)*p plus 1/n_colors times
    the assembled exact local solutions; the energy is nonincreasing.
    """
    drv = _Driver("rj", prob, cfg)
    try:
        p = _init_dual(init, dec.rows, dec.cols)
        drv.record(p, 0.0, [])
        warm: list = [None] * dec.n_subdomains
        inv = 1.0 / dec.n_colors
        for _ in range(cfg.max_outer):
            t0 = drv.tick()
            results = _local_pass(drv, dec, dec.views, p, warm, MODE_EXACT)
            p_new = (1.0 - inv) * p
            for view, (ps, _) in zip(dec.views, results):
                rs, cs = view.owner_slices
                p_new[rs, cs] += inv * ps
            p = p_new
            drv.record(p, drv.tock(t0), [r[1] for r in results])
            if drv.done():
                break
        return p, drv.trace
    finally:
        drv.close()


def prerelaxed_jacobi(prob: RofProblem, dec: Decomposition, cfg: SolverConfig,
                      init: np.ndarray | None = None) -> tuple[np.ndarray, SolverTrace]:
    """Block Jacobi with the relaxation folded into the local objective."""
    drv = _Driver("pj", prob, cfg)
    try:
        p = _init_dual(init, dec.rows, dec.cols)
        drv.record(p, 0.0, [])
        warm: list = [None] * dec.n_subdomains
        for _ in range(cfg.max_outer):
            t0 = drv.tick()
            results = _local_pass(drv, dec, dec.views, p, warm, MODE_PRERELAXED)
            p_new = zeros_dual(dec.rows, dec.cols)
            for view, (ps, _) in zip(dec.views, results):
                rs, cs = view.owner_slices
                p_new[rs, cs] = ps
            p = p_new
            drv.record(p, drv.tock(t0), [r[1] for r in results])
            if drv.done():
                break
        return p, drv.trace
    finally:
        drv.close()


def fast_prerelaxed_jacobi(prob: RofProblem, dec: Decomposition, cfg: SolverConfig,
                           init: np.ndarray | None = None,
                           disable_momentum: bool = False) -> tuple[np.ndarray, SolverTrace]:
    """Pre-relaxed block Jacobi with FISTA momentum on the outer iterates.

    Local solves are evaluated at the extrapolated point, which may leave
    the feasible set; the assembled iterates themselves stay feasible.
    Energy decay is not monotone in general.  With disable_momentum the
    trajectory reduces to the plain pre-relaxed method (diagnostic knob).
    """
    drv = _Driver("fpj", prob, cfg)
    drv.trace.momentum = [1.0]
    try:
        p = _init_dual(init, dec.rows, dec.cols)
        q = p
        t = 1.0
        drv.record(p, 0.0, [])
        warm: list = [None] * dec.n_subdomains
        for _ in range(cfg.max_outer):
            t0 = drv.tick()
            results = _local_pass(drv, dec, dec.views, q, warm, MODE_PRERELAXED)
            p_new = zeros_dual(dec.rows, dec.cols)
            for view, (ps, _) in zip(dec.views, results):
                rs, cs = view.owner_slices
                p_new[rs, cs] = ps
            t_new = 1.0 if disable_momentum else 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            q = p_new + ((t - 1.0) / t_new) * (p_new - p)
            p, t = p_new, t_new
            drv.trace.momentum.append(t)
            drv.record(p, drv.tock(t0), [r[1] for r in results])
            if drv.done():
                break
        return p, drv.trace
    finally:
        drv.close()


def block_gauss_seidel(prob: RofProblem, dec: Decomposition, cfg: SolverConfig,
                       init: np.ndarray | None = None) -> tuple[np.ndarray, SolverTrace]:
    """Sequential sweep over colors, each applying its exact block solves.

    Within a color the subdomain solves are independent and run on the
    pool; across colors the sweep uses the freshest iterate.  The energy
    after each color sub-step is recorded in the trace.
    """
    drv = _Driver("gs", prob, cfg)
    drv.trace.color_energies = [[]]
    try:
        p = _init_dual(init, dec.rows, dec.cols)
        drv.record(p, 0.0, [])
        warm: list = [None] * dec.n_subdomains
        for _ in range(cfg.max_outer):
            t0 = drv.tick()
            inner: dict[int, int] = {}
            step_energies = []
            for color in range(dec.n_colors):
                views = dec.color_groups[color]
                results = _local_pass(drv, dec, views, p, warm, MODE_EXACT)
                p = p.copy()
                for view, (ps, iters) in zip(views, results):
                    rs, cs = view.owner_slices
                    p[rs, cs] = ps
                    inner[view.index] = iters
                step_energies.append(dual_energy(p, prob))
            drv.trace.color_energies.append(step_energies)
            drv.record(p, drv.tock(t0), [inner[s] for s in sorted(inner)])
            if drv.done():
                break
        return p, drv.trace
    finally:
        drv.close()


def fista_full(prob: RofProblem, cfg: SolverConfig, init: np.ndarray | None = None,
               record_trace: bool = True) -> tuple[np.ndarray, SolverTrace]:
    """FISTA on the full-grid dual problem with step 1/8.

    Doubles as the oracle generator, so the iteration works in preallocated
    buffers; with record_trace=False only the final energy is evaluated.
    """
    drv = _Driver("fista", prob, cfg)
    try:
        rows, cols = prob.shape
        f_term = prob.alpha * prob.f
        p = _init_dual(init, rows, cols)
        work = zeros_dual(rows, cols)
        q = p.copy()
        r = np.empty((rows, cols))
        mag = np.empty((rows, cols))
        mag2 = np.empty((rows, cols))
        t = 1.0
        drv.record(p, 0.0, [])
        t_all = drv.tick()
        for _ in range(cfg.max_outer):
            t0 = drv.tick()
            # r = div(q) + alpha*f
            r[:-1, :] = q[:-1, :, 0]
            r[-1, :] = 0.0
            r[1:, :] -= q[:-1, :, 0]
            r[:, :-1] += q[:, :-1, 1]
            r[:, 1:] -= q[:, :-1, 1]
            r += f_term
            # work = q + gradient(r)/8, projected onto the unit disks
            work[:-1, :, 0] = r[1:, :]
            work[:-1, :, 0] -= r[:-1, :]
            work[-1, :, 0] = 0.0
            work[:, :-1, 1] = r[:, 1:]
            work[:, :-1, 1] -= r[:, :-1]
            work[:, -1, 1] = 0.0
            work *= 0.125
            work += q
            np.square(work[..., 0], out=mag)
            np.square(work[..., 1], out=mag2)
            mag += mag2
            np.sqrt(mag, out=mag)
            np.maximum(mag, 1.0, out=mag)
            work /= mag[..., None]
            # momentum extrapolation into q; rotate buffers so p holds the
            # new iterate and work becomes scratch again
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            np.subtract(work, p, out=q)
            q *= (t - 1.0) / t_new
            q += work
            p, work = work, p
            t = t_new
            if record_trace:
                drv.record(p, drv.tock(t0), [1])
                if drv.done():
                    break
        if not record_trace:
            drv.record(p, drv.tock(t_all), [cfg.max_outer])
        return p, drv.trace
    finally:
        drv.close()


METHODS = {
    "rj": relaxed_jacobi,
    "pj": prerelaxed_jacobi,
    "fpj": fast_prerelaxed_jacobi,
    "gs": block_gauss_seidel,
}


@dataclass
class BoundReport:
    """Measured gaps next to the method's convergence-rate guarantees.

    bound_distance uses the blockwise Bregman distance to the oracle dual
    solution; bound_apriori replaces it with the interface-penalty constant
    (always the looser of the two).
    """

    method: str
    n: np.ndarray
    gap: np.ndarray
    bound_distance: np.ndarray
    bound_apriori: np.ndarray
    distance: float
    initial_gap: float
    oracle_energy: float
    penalty_constant: float
    n_colors: int
    violations_distance: list[int]
    violations_apriori: list[int]

    @property
    def ok(self) -> bool:
        return not self.violations_distance and not self.violations_apriori


def evaluate_bounds(trace: SolverTrace, dec: Decomposition, prob: RofProblem,
                    p0: np.ndarray, p_star: np.ndarray) -> BoundReport:
    """Check a trace against its method's energy-decay theorem, per iteration."""
    if trace.method not in ("rj", "pj", "fpj"):
        raise ValueError(f"no convergence-rate bound for method {trace.method!r}")
    f_star = dual_energy(p_star, prob)
    f0 = dual_energy(p0, prob)
    dist = bregman_distance(p_star, p0, dec)
    c1 = interface_penalty_constant(dec)
    nc = dec.n_colors
    gap0 = f0 - f_star

    n = np.arange(1, len(trace.energies))
    gap = np.asarray(trace.energies[1:]) - f_star
    if trace.method == "rj":
        bd = (nc * dist + (nc - 1) * gap0) / n
        ba = (nc / n) * ((2.0 - 1.0 / nc) * gap0 + 2.0 * c1)
    elif trace.method == "pj":
        bd = nc * dist / n
        ba = (nc / n) * (gap0 + 2.0 * c1)
    else:
        bd = 4.0 * nc * dist / (n + 1) ** 2
        ba = 4.0 * nc * (gap0 + 2.0 * c1) / (n + 1) ** 2

    slack = 1e-9 * max(1.0, f_star)
    viol_d = [int(i) for i in n[gap > bd + slack]]
    viol_a = [int(i) for i in n[gap > ba + slack]]
    return BoundReport(method=trace.method, n=n, gap=gap, bound_distance=bd,
                       bound_apriori=ba, distance=dist, initial_gap=gap0,
                       oracle_energy=f_star, penalty_constant=c1, n_colors=nc,
                       violations_distance=viol_d, violations_apriori=viol_a)
