"""Benchmark harness: noise injection, oracle energies, experiment runs, CSV."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .decomposition import Decomposition, make_decomposition
from .grid import RofProblem, dual_energy, psnr, recover_primal
from .local_solver import InnerStopRule
from .noise import add_gaussian_noise
from .pgm import read_pgm, write_pgm
from .solvers import (METHODS, BoundReport, SolverConfig, SolverTrace,
                      fista_full)


@dataclass
class ExperimentSpec:
    """One denoising run: inputs, solver selection, and output paths."""

    input_path: str
    output_path: str
    alpha: float = 10.0
    method: str = "fpj"
    sub_rows: int = 8
    sub_cols: int = 8
    shape: str = "window"
    noise_var: float = 0.05
    seed: int = 0
    outer_tol: float = 1e-5
    outer_max: int = 500
    inner: InnerStopRule = field(default_factory=InnerStopRule)
    oracle_iters: int = 100_000
    oracle_cache: str | None = None
    trace_csv: str | None = None
    report_path: str | None = None
    figure_path: str | None = None
    noisy_output: str | None = None
    threads: int = 1
    collect_timing: bool = True

    def __post_init__(self):
        if self.noise_var < 0:
            raise ValueError("noise variance must be nonnegative")
        if self.method not in ("rj", "pj", "fpj", "gs", "fista"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class ExperimentReport:
    method: str
    alpha: float
    decomposition: str
    n_colors: int | None
    iterations: int
    psnr: float
    noisy_psnr: float | None
    wall_ms: float
    final_energy: float
    oracle_energy: float | None
    relative_gap: float | None
    interface_ratio: float | None
    trace: SolverTrace

    def lines(self) -> list[str]:
        def fmt(x):
            return "-" if x is None else (f"{x:.6g}" if isinstance(x, float) else str(x))

        return [
            f"method: {self.method}",
            f"alpha: {fmt(self.alpha)}",
            f"decomposition: {self.decomposition}",
            f"colors: {fmt(self.n_colors)}",
            f"outer_iterations: {self.iterations}",
            f"psnr_db: {fmt(self.psnr)}",
            f"noisy_psnr_db: {fmt(self.noisy_psnr)}",
            f"wall_ms: {fmt(self.wall_ms)}",
            f"final_energy: {fmt(self.final_energy)}",
            f"oracle_energy: {fmt(self.oracle_energy)}",
            f"relative_gap: {fmt(self.relative_gap)}",
            f"interface_jump_ratio: {fmt(self.interface_ratio)}",
        ]


def oracle_energy(f: np.ndarray, alpha: float, iters: int,
                  cache_dir: str | None = None) -> tuple[np.ndarray, float]:
    """Reference dual solution and energy from a long full-grid FISTA run.

    Results are cached on disk keyed by the image bytes, alpha, and the
    iteration count, so repeated runs of the harness reuse them.
    """
    key = None
    if cache_dir is not None:
        digest = hashlib.sha256()
        digest.update(f.tobytes())
        digest.update(f"|{f.shape}|{alpha!r}|{iters}".encode())
        key = Path(cache_dir) / f"oracle_{digest.hexdigest()[:24]}.npz"
        if key.exists():
            with np.load(key) as data:
                return data["p"], float(data["energy"])
    prob = RofProblem(f, alpha)
    cfg = SolverConfig(max_outer=iters, collect_timing=False)
    p_star, trace = fista_full(prob, cfg, record_trace=False)
    energy = trace.energies[-1]
    if key is not None:
        key.parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(key, p=p_star, energy=energy)
    return p_star, energy


def interface_jump_ratio(u: np.ndarray, dec: Decomposition, seed: int = 0) -> float | None:
    """Mean |jump| across interface pixel pairs over the mean across random
    interior adjacent pairs; near 1 when interfaces leave no trace."""
    rows, cols = u.shape
    h = rows // dec.sub_rows
    w = cols // dec.sub_cols
    jumps = []
    for j in range(1, dec.sub_cols):
        jumps.append(np.abs(u[:, j * w] - u[:, j * w - 1]))
    for i in range(1, dec.sub_rows):
        jumps.append(np.abs(u[i * h, :] - u[i * h - 1, :]))
    if not jumps:
        return None
    if h == 1 and w == 1:
        return None  # every adjacent pair crosses an interface
    interface = np.concatenate(jumps)

    rng = np.random.Generator(np.random.Philox(seed))
    samples = np.empty(4 * interface.size)
    k = 0
    while k < samples.size:
        i = int(rng.integers(0, rows))
        j = int(rng.integers(0, cols))
        if rng.integers(0, 2) == 0:
            if j + 1 >= cols or (j + 1) % w == 0:
                continue
            samples[k] = abs(u[i, j + 1] - u[i, j])
        else:
            if i + 1 >= rows or (i + 1) % h == 0:
                continue
            samples[k] = abs(u[i + 1, j] - u[i, j])
        k += 1
    interior = float(np.mean(samples))
    if interior == 0.0:
        return math.inf if float(np.mean(interface)) > 0 else 1.0
    return float(np.mean(interface)) / interior


def _fmt_float(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def write_trace_csv(trace: SolverTrace, path):
    """Per-iteration CSV: n, energy, relative gap, wall ms, total inner iterations."""
    lines = ["n,F,rel_gap,wall_ms,inner_iter_total"]
    for n in range(len(trace.energies)):
        lines.append(",".join([
            str(n),
            _fmt_float(trace.energies[n]),
            _fmt_float(trace.gaps[n]),
            _fmt_float(trace.wall_ms[n]),
            str(int(sum(trace.inner_iters[n]))),
        ]))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def emit_decay_csv(labeled_traces: list[tuple[str, SolverTrace]], oracle: float, path,
                   bounds: dict[str, BoundReport] | None = None):
    """Long-format CSV of relative gaps per method, with theorem-bound columns."""
    if not oracle > 0:
        raise ValueError("oracle energy must be positive")
    lines = ["method,n,F,rel_gap,bound_distance,bound_apriori"]
    for label, trace in labeled_traces:
        report = bounds.get(label) if bounds else None
        for n in range(len(trace.energies)):
            energy = trace.energies[n]
            gap = (energy - oracle) / oracle
            bd = ba = None
            if report is not None and 1 <= n <= len(report.n):
                bd = report.bound_distance[n - 1] / oracle
                ba = report.bound_apriori[n - 1] / oracle
            lines.append(",".join([
                label, str(n), _fmt_float(energy), _fmt_float(gap),
                _fmt_float(bd), _fmt_float(ba),
            ]))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """Load, corrupt, denoise, and write every requested artifact."""
    clean = read_pgm(spec.input_path)
    noisy = add_gaussian_noise(clean, spec.noise_var, spec.seed)
    prob = RofProblem(noisy, spec.alpha)

    f_star = None
    if spec.oracle_iters > 0:
        _, f_star = oracle_energy(noisy, spec.alpha, spec.oracle_iters, spec.oracle_cache)

    cfg = SolverConfig(
        gap_tol=spec.outer_tol if f_star is not None else None,
        change_tol=None if f_star is not None else spec.outer_tol,
        max_outer=spec.outer_max,
        inner=spec.inner,
        oracle_energy=f_star,
        threads=spec.threads,
        collect_timing=spec.collect_timing,
    )

    dec = None
    if spec.method == "fista":
        p, trace = fista_full(prob, cfg)
        dec_label = "-"
        n_colors = None
    else:
        dec = make_decomposition(*prob.shape, spec.sub_rows, spec.sub_cols, spec.shape)
        p, trace = METHODS[spec.method](prob, dec, cfg)
        dec_label = f"{spec.sub_rows}x{spec.sub_cols} {spec.shape}"
        n_colors = dec.n_colors

    u = recover_primal(p, prob)
    trace.psnr = psnr(u, clean)
    write_pgm(u, spec.output_path)
    if spec.noisy_output:
        write_pgm(noisy, spec.noisy_output)
    if spec.trace_csv:
        write_trace_csv(trace, spec.trace_csv)
    if spec.figure_path:
        from .figures import save_decay_figure

        if any(g is not None for g in trace.gaps):
            save_decay_figure([(spec.method, trace.gaps)], spec.figure_path)
        else:
            rel = [e / trace.energies[0] if trace.energies[0] > 0 else None
                   for e in trace.energies]
            save_decay_figure([(spec.method, rel)], spec.figure_path,
                              title="Energy (relative to start)")

    ratio = None
    if dec is not None and dec.n_subdomains > 1:
        ratio = interface_jump_ratio(u, dec, seed=spec.seed)
    report = ExperimentReport(
        method=spec.method,
        alpha=spec.alpha,
        decomposition=dec_label,
        n_colors=n_colors,
        iterations=trace.n_iterations,
        psnr=trace.psnr,
        noisy_psnr=psnr(noisy, clean) if spec.noise_var > 0 else None,
        wall_ms=trace.total_wall_ms(),
        final_energy=trace.energies[-1],
        oracle_energy=f_star,
        relative_gap=trace.gaps[-1],
        interface_ratio=ratio,
        trace=trace,
    )
    if spec.report_path:
        Path(spec.report_path).write_text("\n".join(report.lines()) + "\n")
    return report
