"""Nonoverlapping domain-decomposition solvers for dual total-variation denoising."""

from .decomposition import (Decomposition, SubdomainView, bregman_distance,
                            extend, interface_length, interface_penalty_constant,
                            local_divergence, local_divergence_adjoint,
                            make_decomposition, restrict, restrict_subdomain)
from .experiment import (ExperimentReport, ExperimentSpec, emit_decay_csv,
                         interface_jump_ratio, oracle_energy, run_experiment,
                         write_trace_csv)
from .grid import (RofProblem, dual_energy, dual_energy_gradient, divergence,
                   gradient, project_unit_disk, psnr, recover_primal, sq_norm,
                   zeros_dual)
from .local_solver import (InnerStopRule, LocalProblem, build_local_problem,
                           solve_local_exact, solve_local_prerelaxed)
from .noise import add_gaussian_noise
from .pgm import PgmError, read_pgm, write_pgm
from .solvers import (BoundReport, NumericalError, SolverConfig, SolverTrace,
                      block_gauss_seidel, evaluate_bounds, fast_prerelaxed_jacobi,
                      fista_full, prerelaxed_jacobi, relaxed_jacobi)
from .synthetic import synthetic_image

__all__ = [
    "Decomposition", "SubdomainView", "bregman_distance", "extend",
    "interface_length", "interface_penalty_constant", "local_divergence",
    "local_divergence_adjoint", "make_decomposition", "restrict",
    "restrict_subdomain",
    "ExperimentReport", "ExperimentSpec", "emit_decay_csv",
    "interface_jump_ratio", "oracle_energy", "run_experiment", "write_trace_csv",
    "RofProblem", "dual_energy", "dual_energy_gradient", "divergence",
    "gradient", "project_unit_disk", "psnr", "recover_primal", "sq_norm",
    "zeros_dual",
    "InnerStopRule", "LocalProblem", "build_local_problem",
    "solve_local_exact", "solve_local_prerelaxed",
    "add_gaussian_noise",
    "PgmError", "read_pgm", "write_pgm",
    "BoundReport", "NumericalError", "SolverConfig", "SolverTrace",
    "block_gauss_seidel", "evaluate_bounds", "fast_prerelaxed_jacobi",
    "fista_full", "prerelaxed_jacobi", "relaxed_jacobi",
    "synthetic_image",
]
