"""Command-line interface.

Subcommands::

    coherence <matrix-file> [--block d]      coherence report as JSON
    bounds --k K --mu MU [...]               error-bound constants as JSON
    solve --model M --matrix F --b-file F    run one solve, result as JSON
    experiment --config FILE                 run a certification experiment
    verify quasi-rip --matrix F --k K        brute-force eigenvalue check

Exit codes: 0 success; 1 validation problem (bad flags, bad config, a
violated condition); 2 runtime failure (IO, generation, non-convergence);
3 certification failure (an experiment produced a false pass flag).
"""

import argparse
import json
import sys

import numpy as np

from . import backend, bounds, harness, matrixlab, signals, solvers
from .errors import (
    CapUnreachable,
    CoherenceCSError,
    ConditionViolated,
    ConfigError,
    EnumerationTooLarge,
    IOFailure,
    NotConverged,
)

QUASI_RIP_MARGIN = -1e-10


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _emit(payload):
    print(json.dumps(payload, indent=2, sort_keys=True))


def _load_normalized(path):
    A = matrixlab.load_matrix(path)
    if not A.normalized:
        A = matrixlab.normalize_columns(A)
    return A


def _cmd_coherence(args):
    A = _load_normalized(args.matrix)
    if args.block is not None:
        if args.block < 1 or A.n % args.block != 0:
            print(
                f"error: block size {args.block} does not divide n = {A.n}",
                file=sys.stderr,
            )
            return 1
        A = matrixlab.MeasurementMatrix(A.entries, d=args.block, normalized=A.normalized)
    report = matrixlab.coherence_report(A)
    _emit(
        {
            "mu": report.mu,
            "mu_block": report.mu_block,
            "nu": report.nu,
            "d": report.d,
            "k_sharp": report.k_sharp,
            "k_block": report.k_block,
            "k_eldar": report.k_eldar,
            "k_eldar_strict": report.k_eldar_strict,
        }
    )
    return 0


def _cmd_bounds(args):
    if (args.block is None) != (args.mu_b is None):
        print("error: --block and --mu-b must be given together", file=sys.stderr)
        return 1
    if args.block is not None:
        bset = bounds.block_recovery_bounds(
            args.k, args.block, args.mu_b, args.lam, args.epsilon, args.variant
        )
        flags = {
            "block_condition": bounds.block_condition(args.k, args.block, args.mu_b),
            "eldar_condition": bounds.eldar_condition(
                args.k, args.block, args.mu_b, args.nu
            ),
        }
    else:
        bset = bounds.recovery_bounds(
            args.k, args.mu, args.lam, args.epsilon, args.variant
        )
        flags = {
            "sharp_condition": bounds.sharp_condition(args.k, args.mu),
            "li_chen_condition": bounds.li_chen_condition(args.k, args.mu),
        }
    payload = {
        "C1": bset.C1,
        "C2": bset.C2,
        "C3": bset.C3,
        "C4": bset.C4,
        "alpha1": bset.alpha1,
        "alpha2": bset.alpha2,
        "k": bset.k,
        "mu_eff": bset.mu_eff,
        "lambda": bset.lam,
        "epsilon": bset.epsilon,
        "variant": bset.variant,
    }
    payload.update(flags)
    _emit(payload)
    return 0


def _cmd_solve(args):
    A = _load_normalized(args.matrix)
    b = signals.load_vector(args.b_file)
    problem = solvers.Problem(A=A, b=b, lam=args.lam, model=args.model)
    cfg = solvers.SolverConfig(tolerance=args.tol, max_iters=args.max_iters)
    code = 0
    try:
        result = solvers.solve(problem, cfg)
    except NotConverged as exc:
        result = exc.result
        code = 2
    if args.x_out:
        signals.save_vector(result.x_sharp, args.x_out)
    payload = {
        "model": args.model,
        "objective": result.objective,
        "iterations": result.iterations,
        "kkt_residual": result.kkt_residual,
        "converged": result.converged,
        "nonzeros": int(np.count_nonzero(result.x_sharp)),
        "backend": backend.NAME,
        "x_file": args.x_out,
    }
    if result.constraint_residual is not None:
        payload["constraint_residual"] = result.constraint_residual
        payload["rho_final"] = result.rho_final
    _emit(payload)
    return code


def _cmd_experiment(args):
    cfg = harness.load_config(args.config)
    records, summary = harness.run_experiment(cfg)
    csv_path = args.csv or cfg.csv_path
    json_path = args.json_out or cfg.json_path
    if csv_path:
        harness.emit_csv(records, csv_path)
    if json_path:
        harness.emit_json(summary, json_path)
    print(
        "condition_strict={} pass_meas={}/{} pass_sig={}/{} failed={}".format(
            summary["condition_strict"],
            summary["pass_meas_count"],
            summary["evaluated_trials_meas"],
            summary["pass_sig_count"],
            summary["evaluated_trials_sig"],
            summary["failed_trials"],
        )
    )
    any_false = any(
        flag is False for r in records for flag in (r.pass_meas, r.pass_sig)
    )
    return 3 if any_false else 0


def _cmd_verify_quasi_rip(args):
    A = _load_normalized(args.matrix)
    report = matrixlab.verify_quasi_rip(A, args.k)
    _emit(
        {
            "k": report.k,
            "mu": report.mu,
            "worst_lower_margin": report.worst_lower,
            "worst_upper_margin": report.worst_upper,
            "support_lower": list(report.support_lower),
            "support_upper": list(report.support_upper),
            "supports_checked": report.supports_checked,
            "backend": backend.NAME,
        }
    )
    ok = report.worst_lower >= QUASI_RIP_MARGIN and report.worst_upper >= QUASI_RIP_MARGIN
    return 0 if ok else 2


def build_parser():
    parser = _Parser(
        prog="coherence-cs",
        description="Coherence-based sparse recovery: diagnostics, bounds, "
        "solvers, certification experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "coherence",
        help="coherence report for a matrix file (columns are normalized first)",
    )
    p.add_argument("matrix", help="matrix text file ('m n d' header)")
    p.add_argument("--block", type=int, help="override the block size d")
    p.set_defaults(func=_cmd_coherence)

    p = sub.add_parser("bounds", help="closed-form error-bound constants")
    p.add_argument("--k", type=int, required=True, help="sparsity")
    p.add_argument("--mu", type=float, default=None, help="mutual coherence")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--variant", choices=("statement", "proof"), default="proof")
    p.add_argument("--block", type=int, default=None, help="block size d")
    p.add_argument("--mu-b", dest="mu_b", type=float, default=None, help="block coherence")
    p.add_argument("--nu", type=float, default=0.0, help="sub-coherence (block mode)")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("solve", help="solve one instance from matrix/vector files")
    p.add_argument("--model", choices=solvers.MODELS, required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--b-file", dest="b_file", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=100_000)
    p.add_argument("--x-out", dest="x_out", help="write the minimizer here")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("experiment", help="run a certification experiment")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--csv", help="override the config's CSV output path")
    p.add_argument("--json", dest="json_out", help="override the summary path")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("verify", help="brute-force verifications")
    vsub = p.add_subparsers(dest="verify_what", required=True)
    q = vsub.add_parser(
        "quasi-rip", help="eigenvalue sandwich over all size-k supports"
    )
    q.add_argument("--matrix", required=True)
    q.add_argument("--k", type=int, required=True)
    q.set_defaults(func=_cmd_verify_quasi_rip)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    if getattr(args, "command", None) == "bounds":
        if args.block is None and args.mu is None:
            print("error: --mu is required (or --block with --mu-b)", file=sys.stderr)
            return 1
    try:
        return args.func(args)
    except (ConditionViolated, ConfigError, EnumerationTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IOFailure, CapUnreachable, CoherenceCSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
