"""Command-line denoising harness.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .experiment import ExperimentSpec, run_experiment
from .local_solver import InnerStopRule
from .pgm import PgmError
from .solvers import NumericalError


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_subdomains(text: str, shape: str) -> tuple[int, int]:
    """Accept 'MsxNs', or a bare count (stripes, or a square window grid)."""
    try:
        if "x" in text:
            ms, ns = text.lower().split("x")
            return int(ms), int(ns)
        count = int(text)
        if shape == "stripe":
            return count, 1
        root = int(round(count ** 0.5))
        if root * root != count:
            raise ValueError
        return root, root
    except ValueError:
        raise _UsageError(
            f"cannot parse --subdomains {text!r}: use MsxNs (e.g. 8x8), or a "
            "stripe count / perfect square") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ddrof", description="Domain-decomposed dual TV denoising")
    p.add_argument("--input", required=True, help="clean input image (PGM P2/P5)")
    p.add_argument("--output", required=True, help="denoised output image (PGM)")
    p.add_argument("--alpha", type=float, default=10.0, help="fidelity weight")
    p.add_argument("--method", default="fpj", choices=["rj", "pj", "fpj", "gs", "fista"])
    p.add_argument("--subdomains", default="8x8", help="subdomain grid MsxNs or count")
    p.add_argument("--shape", default="window", choices=["window", "stripe"])
    p.add_argument("--noise-var", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outer-tol", type=float, default=1e-5)
    p.add_argument("--outer-max", type=int, default=500)
    p.add_argument("--inner-tol", type=float, default=1e-4)
    p.add_argument("--inner-max", type=int, default=50)
    p.add_argument("--oracle-iters", type=int, default=100_000,
                   help="full-grid FISTA iterations for the reference energy; "
                        "0 switches to relative-change stopping")
    p.add_argument("--oracle-cache", default=None, help="directory for cached oracles")
    p.add_argument("--trace-csv", default=None, help="per-iteration trace CSV path")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--report", default=None, help="write the text report here too")
    p.add_argument("--figure", default=None, help="render the decay figure (PNG) here")
    p.add_argument("--noisy-output", default=None, help="write the corrupted image here")
    p.add_argument("--no-timing", action="store_true",
                   help="zero the wall_ms column for byte-reproducible traces")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        sub_rows, sub_cols = _parse_subdomains(args.subdomains, args.shape)
        spec = ExperimentSpec(
            input_path=args.input,
            output_path=args.output,
            alpha=args.alpha,
            method=args.method,
            sub_rows=sub_rows,
            sub_cols=sub_cols,
            shape=args.shape,
            noise_var=args.noise_var,
            seed=args.seed,
            outer_tol=args.outer_tol,
            outer_max=args.outer_max,
            inner=InnerStopRule(rel_tol=args.inner_tol, max_iters=args.inner_max),
            oracle_iters=args.oracle_iters,
            oracle_cache=args.oracle_cache,
            trace_csv=args.trace_csv,
            report_path=args.report,
            figure_path=args.figure,
            noisy_output=args.noisy_output,
            threads=args.threads,
            collect_timing=not args.no_timing,
        )
    except (_UsageError, ValueError) as exc:
        print(f"ddrof: {exc}", file=sys.stderr)
        return 1

    try:
        report = run_experiment(spec)
    except (PgmError, OSError) as exc:
        print(f"ddrof: i/o error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"ddrof: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (_UsageError, ValueError) as exc:
        print(f"ddrof: {exc}", file=sys.stderr)
        return 1

    print("\n".join(report.lines()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
