"""End-to-end certification experiments.

One experiment = one measurement matrix + many (signal, noise) trials. Per
trial the harness solves the configured model, splits the recovery error
with analyze_residual, evaluates the closed-form bounds

    bound_meas = C1 * tail + C2        bound_sig = C3 * tail + C4

(tail = l1 k-term tail, or the mixed-norm block tail for the group model;
the measurement-side error is ||Ah||_2, or ||A^T A h||_inf for the
correlated-residual model), and records pass flags

    pass = (error <= bound * (1 + 1e-6))

only when the matching coherence condition holds strictly and the solver
converged; otherwise the flags stay None and the trial is excluded from
pass-rate denominators.

Determinism: trial t draws its signal from substream (seed, 1, t) and its
noise from (seed, 2, t); the matrix comes from (seed, 0, 0). Records are
assembled in trial order regardless of which worker thread ran them, so a
config produces byte-identical CSV output for any thread count. Trial wall
times are recorded only when record_timing is set (it defaults to off
precisely to keep the output reproducible byte for byte).
"""

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import backend
from .bounds import block_condition, block_recovery_bounds, recovery_bounds, sharp_condition
from .errors import ConfigError, CoherenceCSError, IOFailure, NotConverged
from .matrixlab import (
    block_coherence,
    generate_matrix,
    mutual_coherence,
    spectral_norm,
    sub_coherence,
)
from .signals import NoiseModel, SignalSpec, generate_noise, generate_signal, substream_seed, tail_norms
from .solvers import Problem, SolverConfig, analyze_residual, solve

__all__ = [
    "ExperimentConfig",
    "ExperimentRecord",
    "load_config",
    "run_experiment",
    "emit_csv",
    "emit_json",
    "worker_count",
]

CSV_COLUMNS = (
    "trial",
    "mu",
    "mu_block",
    "nu",
    "condition_strict",
    "condition_nonstrict",
    "tail_l1",
    "tail_block",
    "meas_error",
    "ds_error",
    "sig_error",
    "bound_meas",
    "bound_sig",
    "pass_meas",
    "pass_sig",
    "iterations",
    "kkt_residual",
    "wall_ms",
)

PASS_SLACK = 1e-6  # relative slack absorbing solver tolerance in bound checks
ORTHONORMAL_TOL = 1e-10

_MODEL_NOISE = {"lasso": "l2_ball", "ds_reg": "ds_type", "group_lasso": "l2_ball"}
_MODEL_SIGNAL = {"lasso": "sparse", "ds_reg": "sparse", "group_lasso": "block_sparse"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description (see load_config for the JSON).

    lam may be the string 'equal_epsilon', resolved to the noise level at
    run time.
    """

    model: str
    m: int
    n: int
    k: int
    d: int = 1
    matrix_kind: str = "gaussian"
    coherence_cap: float = None
    max_attempts: int = 50
    signal_structure: str = None  # default chosen from the model
    signal_magnitude: str = "unit"
    signal_lo: float = 0.5
    signal_hi: float = 1.5
    decay_exponent: float = 2.0
    noise_kind: str = None  # default chosen from the model
    epsilon: float = 0.0
    ds_norm: str = "inf"
    lam: object = "equal_epsilon"
    trials: int = 1
    seed: int = 0
    variant: str = "proof"
    tolerance: float = 1e-8
    max_iters: int = 100_000
    history_cap: int = 0
    record_timing: bool = False
    csv_path: str = None
    json_path: str = None

    def __post_init__(self):
        if self.model not in _MODEL_NOISE:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.k < 2:
            raise ConfigError(
                f"k must be >= 2 (the bound factors are undefined below), got {self.k}"
            )
        if self.m < 1 or self.n < 1 or self.d < 1 or self.n % self.d != 0:
            raise ConfigError(f"bad dimensions (m={self.m}, n={self.n}, d={self.d})")
        if self.model == "group_lasso":
            if self.k > self.n // self.d:
                raise ConfigError(f"k={self.k} exceeds block count {self.n // self.d}")
        elif self.k > self.n:
            raise ConfigError(f"k={self.k} exceeds n={self.n}")
        object.__setattr__(
            self,
            "signal_structure",
            self.signal_structure or _MODEL_SIGNAL[self.model],
        )
        object.__setattr__(
            self, "noise_kind", self.noise_kind or _MODEL_NOISE[self.model]
        )
        if self.noise_kind != "none" and self.noise_kind != _MODEL_NOISE[self.model]:
            raise ConfigError(
                f"noise kind {self.noise_kind!r} does not pair with model "
                f"{self.model!r} (expected {_MODEL_NOISE[self.model]!r} or 'none')"
            )
        if self.epsilon < 0:
            raise ConfigError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.lam == "equal_epsilon":
            if self.epsilon <= 0:
                raise ConfigError(
                    "lambda='equal_epsilon' needs epsilon > 0; give a numeric lambda"
                )
        elif not (isinstance(self.lam, (int, float)) and self.lam > 0):
            raise ConfigError(f"lambda must be positive or 'equal_epsilon', got {self.lam!r}")
        if self.variant not in ("proof", "statement"):
            raise ConfigError(f"variant must be 'proof' or 'statement', got {self.variant!r}")
        # probe-construct the per-trial objects so bad signal/noise settings
        # surface here as config errors, not inside worker threads
        try:
            SignalSpec(
                n=self.n,
                structure=self.signal_structure,
                k=self.k,
                d=self.d,
                decay_exponent=self.decay_exponent,
                magnitude=self.signal_magnitude,
                lo=self.signal_lo,
                hi=self.signal_hi,
                seed=0,
            )
            NoiseModel(kind=self.noise_kind, epsilon=self.epsilon, ds_norm=self.ds_norm)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def resolved_lambda(self):
        return float(self.epsilon if self.lam == "equal_epsilon" else self.lam)


@dataclass(frozen=True)
class ExperimentRecord:
    """One trial's errors, bounds, and certificates (one CSV row).

    pass_meas / pass_sig are None when the condition failed or the solver
    did not converge. failure carries a reason string for trials that died
    with an error; their numeric fields are NaN.
    """

    trial: int
    mu: float
    mu_block: float
    nu: float
    condition_strict: bool
    condition_nonstrict: bool
    tail_l1: float
    tail_block: float
    meas_error: float
    ds_error: float
    sig_error: float
    bound_meas: float
    bound_sig: float
    pass_meas: bool
    pass_sig: bool
    iterations: int
    kkt_residual: float
    wall_ms: float
    converged: bool = False
    failure: str = None


_CONFIG_KEYS = {
    "model",
    "m",
    "n",
    "d",
    "k",
    "matrix",
    "signal",
    "noise",
    "lambda",
    "trials",
    "seed",
    "variant",
    "solver",
    "record_timing",
    "output",
}


def load_config(source):
    """Build an ExperimentConfig from a JSON file path or a parsed dict.

    Schema (defaults in parentheses)::

        {
          "model": "lasso" | "ds_reg" | "group_lasso",
          "m": int, "n": int, "k": int, "d": int (1),
          "matrix": {"kind": "gaussian" | "block_orthonormal",
                     "coherence_cap": float (none), "max_attempts": int (50)},
          "signal": {"structure": ... (from model), "magnitude": "unit",
                     "lo": 0.5, "hi": 1.5, "decay_exponent": 2.0},
          "noise":  {"kind": ... (from model), "epsilon": 0.0,
                     "ds_norm": "inf" | "l2"},
          "lambda": float | "equal_epsilon" ("equal_epsilon"),
          "trials": int (1), "seed": int (0),
          "variant": "proof" | "statement" ("proof"),
          "solver": {"tolerance": 1e-8, "max_iters": 100000,
                     "history_cap": 0},
          "record_timing": false,
          "output": {"csv": path (none), "json": path (none)}
        }

    Unknown keys anywhere are rejected.
    """
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise IOFailure(source, exc) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: invalid JSON ({exc})") from exc
    else:
        raw = dict(source)
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    def sub(name, allowed):
        block = raw.get(name) or {}
        if not isinstance(block, dict):
            raise ConfigError(f"config section {name!r} must be an object")
        bad = set(block) - allowed
        if bad:
            raise ConfigError(f"unknown keys in {name!r}: {sorted(bad)}")
        return block

    matrix = sub("matrix", {"kind", "coherence_cap", "max_attempts"})
    signal = sub("signal", {"structure", "magnitude", "lo", "hi", "decay_exponent"})
    noise = sub("noise", {"kind", "epsilon", "ds_norm"})
    solver = sub("solver", {"tolerance", "max_iters", "history_cap"})
    output = sub("output", {"csv", "json"})
    missing = [key for key in ("model", "m", "n", "k") if key not in raw]
    if missing:
        raise ConfigError(f"missing required config keys: {missing}")
    try:
        return ExperimentConfig(
            model=raw["model"],
            m=int(raw["m"]),
            n=int(raw["n"]),
            k=int(raw["k"]),
            d=int(raw.get("d", 1)),
            matrix_kind=matrix.get("kind", "gaussian"),
            coherence_cap=matrix.get("coherence_cap"),
            max_attempts=int(matrix.get("max_attempts", 50)),
            signal_structure=signal.get("structure"),
            signal_magnitude=signal.get("magnitude", "unit"),
            signal_lo=float(signal.get("lo", 0.5)),
            signal_hi=float(signal.get("hi", 1.5)),
            decay_exponent=float(signal.get("decay_exponent", 2.0)),
            noise_kind=noise.get("kind"),
            epsilon=float(noise.get("epsilon", 0.0)),
            ds_norm=noise.get("ds_norm", "inf"),
            lam=raw.get("lambda", "equal_epsilon"),
            trials=int(raw.get("trials", 1)),
            seed=int(raw.get("seed", 0)),
            variant=raw.get("variant", "proof"),
            tolerance=float(solver.get("tolerance", 1e-8)),
            max_iters=int(solver.get("max_iters", 100_000)),
            history_cap=int(solver.get("history_cap", 0)),
            record_timing=bool(raw.get("record_timing", False)),
            csv_path=output.get("csv"),
            json_path=output.get("json"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config value: {exc}") from exc


def worker_count():
    """Trial-level parallelism: COHERENCE_CS_THREADS, else available cores."""
    raw = os.environ.get("COHERENCE_CS_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"COHERENCE_CS_THREADS={raw!r} is not an integer") from exc
    if value < 1:
        raise ConfigError(f"COHERENCE_CS_THREADS must be >= 1, got {value}")
    return value


def _nan_record(trial, mu, mu_block, nu, strict, nonstrict, reason):
    return ExperimentRecord(
        trial=trial,
        mu=mu,
        mu_block=mu_block,
        nu=nu,
        condition_strict=strict,
        condition_nonstrict=nonstrict,
        tail_l1=float("nan"),
        tail_block=float("nan"),
        meas_error=float("nan"),
        ds_error=float("nan"),
        sig_error=float("nan"),
        bound_meas=None,
        bound_sig=None,
        pass_meas=None,
        pass_sig=None,
        iterations=0,
        kkt_residual=float("nan"),
        wall_ms=0.0,
        converged=False,
        failure=reason,
    )


def run_experiment(cfg):
    """Run all trials of cfg; returns (records, summary).

    Generation or solver errors inside a trial mark that trial failed and
    do not abort the batch. Matrix generation failure (cap unreachable)
    aborts, since every trial shares the matrix.
    """
    A = generate_matrix(
        cfg.matrix_kind,
        cfg.m,
        cfg.n,
        d=cfg.d,
        seed=substream_seed(cfg.seed, 0, 0),
        coherence_cap=cfg.coherence_cap,
        max_attempts=cfg.max_attempts,
    )
    mu = mutual_coherence(A)
    if cfg.d > 1:
        mu_block = block_coherence(A)
        nu = sub_coherence(A)
    else:
        mu_block = mu
        nu = 0.0

    if cfg.model == "group_lasso":
        strict = block_condition(cfg.k, cfg.d, mu_block)
        nonstrict = mu_block <= 1.0 / ((2 * cfg.k - 1) * cfg.d)
    else:
        strict = sharp_condition(cfg.k, mu)
        nonstrict = mu <= 1.0 / (2 * cfg.k - 1)

    orthonormal_blocks = None
    if cfg.model == "group_lasso" and cfg.d > 1:
        orthonormal_blocks = bool(nu <= ORTHONORMAL_TOL)

    lam = cfg.resolved_lambda
    eps = float(cfg.epsilon)
    bound_set = None
    if strict and orthonormal_blocks is not False:
        if cfg.model == "group_lasso":
            bound_set = block_recovery_bounds(
                cfg.k, cfg.d, mu_block, lam, eps, cfg.variant
            )
        else:
            bound_set = recovery_bounds(cfg.k, mu, lam, eps, cfg.variant)

    lipschitz = spectral_norm(A.entries) ** 2
    solver_cfg = SolverConfig(
        tolerance=cfg.tolerance,
        max_iters=cfg.max_iters,
        history_cap=cfg.history_cap,
        lipschitz=lipschitz,
    )

    def run_trial(t):
        started = time.perf_counter() if cfg.record_timing else 0.0
        try:
            x_true = generate_signal(
                SignalSpec(
                    n=cfg.n,
                    structure=cfg.signal_structure,
                    k=cfg.k,
                    d=cfg.d,
                    decay_exponent=cfg.decay_exponent,
                    magnitude=cfg.signal_magnitude,
                    lo=cfg.signal_lo,
                    hi=cfg.signal_hi,
                    seed=substream_seed(cfg.seed, 1, t),
                )
            )
            noise = generate_noise(
                NoiseModel(
                    kind=cfg.noise_kind,
                    epsilon=eps,
                    seed=substream_seed(cfg.seed, 2, t),
                    ds_norm=cfg.ds_norm,
                ),
                A,
            )
            b = A.entries @ x_true + noise
            problem = Problem(A=A, b=b, lam=lam, model=cfg.model)
            try:
                result = solve(problem, solver_cfg)
            except NotConverged as exc:
                result = exc.result
        except CoherenceCSError as exc:
            return _nan_record(
                t, mu, mu_block, nu, strict, nonstrict, f"{type(exc).__name__}: {exc}"
            )
        analysis = analyze_residual(x_true, result.x_sharp, A, cfg.k, cfg.d)
        tail_l1, tail_block = tail_norms(x_true, cfg.k, cfg.d)
        if cfg.model == "group_lasso":
            tail = tail_block
        else:
            tail = tail_l1
        meas_side = analysis.ds_error if cfg.model == "ds_reg" else analysis.meas_error
        bound_meas = bound_sig = None
        pass_meas = pass_sig = None
        if bound_set is not None:
            bound_meas = bound_set.C1 * tail + bound_set.C2
            bound_sig = bound_set.C3 * tail + bound_set.C4
            if result.converged:
                pass_meas = bool(meas_side <= bound_meas * (1.0 + PASS_SLACK))
                pass_sig = bool(analysis.sig_error <= bound_sig * (1.0 + PASS_SLACK))
        wall_ms = (time.perf_counter() - started) * 1e3 if cfg.record_timing else 0.0
        return ExperimentRecord(
            trial=t,
            mu=mu,
            mu_block=mu_block,
            nu=nu,
            condition_strict=strict,
            condition_nonstrict=nonstrict,
            tail_l1=tail_l1,
            tail_block=tail_block,
            meas_error=analysis.meas_error,
            ds_error=analysis.ds_error,
            sig_error=analysis.sig_error,
            bound_meas=bound_meas,
            bound_sig=bound_sig,
            pass_meas=pass_meas,
            pass_sig=pass_sig,
            iterations=result.iterations,
            kkt_residual=result.kkt_residual,
            wall_ms=wall_ms,
            converged=result.converged,
            failure=None,
        )

    workers = worker_count()
    if workers == 1:
        records = [run_trial(t) for t in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_trial, range(cfg.trials)))

    return records, _summarize(cfg, A, records, mu, mu_block, nu, strict, nonstrict,
                               orthonormal_blocks, bound_set, lam, eps)


def _rate(numer, denom):
    return (numer / denom) if denom else None


def _summarize(cfg, A, records, mu, mu_block, nu, strict, nonstrict,
               orthonormal_blocks, bound_set, lam, eps):
    ok = [r for r in records if r.failure is None]
    converged = [r for r in ok if r.converged]
    eval_meas = [r for r in records if r.pass_meas is not None]
    eval_sig = [r for r in records if r.pass_sig is not None]
    ratios_meas = []
    ratios_sig = []
    for r in eval_meas:
        err = r.ds_error if cfg.model == "ds_reg" else r.meas_error
        if r.bound_meas:
            ratios_meas.append(err / r.bound_meas)
    for r in eval_sig:
        if r.bound_sig:
            ratios_sig.append(r.sig_error / r.bound_sig)
    summary = {
        "model": cfg.model,
        "m": cfg.m,
        "n": cfg.n,
        "d": cfg.d,
        "k": cfg.k,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "variant": cfg.variant,
        "matrix_kind": cfg.matrix_kind,
        "coherence_cap": cfg.coherence_cap,
        "signal_structure": cfg.signal_structure,
        "signal_magnitude": cfg.signal_magnitude,
        "noise_kind": cfg.noise_kind,
        "ds_norm": cfg.ds_norm if cfg.noise_kind == "ds_type" else None,
        "epsilon": eps,
        "lambda": lam,
        "mu": mu,
        "mu_block": mu_block,
        "nu": nu,
        "condition_strict": strict,
        "condition_nonstrict": nonstrict,
        "orthonormal_blocks": orthonormal_blocks,
        "bounds": None
        if bound_set is None
        else {
            "C1": bound_set.C1,
            "C2": bound_set.C2,
            "C3": bound_set.C3,
            "C4": bound_set.C4,
            "alpha1": bound_set.alpha1,
            "alpha2": bound_set.alpha2,
        },
        "backend": backend.NAME,
        "converged_trials": len(converged),
        "failed_trials": len(records) - len(ok),
        "evaluated_trials_meas": len(eval_meas),
        "evaluated_trials_sig": len(eval_sig),
        "pass_meas_count": sum(1 for r in eval_meas if r.pass_meas),
        "pass_sig_count": sum(1 for r in eval_sig if r.pass_sig),
        "pass_rate_meas": _rate(sum(1 for r in eval_meas if r.pass_meas), len(eval_meas)),
        "pass_rate_sig": _rate(sum(1 for r in eval_sig if r.pass_sig), len(eval_sig)),
        "max_ratio_meas": max(ratios_meas) if ratios_meas else None,
        "max_ratio_sig": max(ratios_sig) if ratios_sig else None,
        "mean_iterations": (
            sum(r.iterations for r in ok) / len(ok) if ok else None
        ),
        "max_kkt_residual": max((r.kkt_residual for r in converged), default=None),
    }
    return summary


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def emit_csv(records, path):
    """Write records as CSV in the fixed column order; header always present.

    Raises ValueError on an empty record list (no file is created) and
    IOFailure on filesystem errors. Output is deterministic: fixed column
    order, fixed float formatting (17 significant digits), "\\n" line ends.
    """
    if not records:
        raise ValueError("emit_csv needs at least one record")
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        lines.append(",".join(_cell(getattr(r, col)) for col in CSV_COLUMNS))
    try:
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IOFailure(path, exc) from exc


def emit_json(summary, path):
    """Write the experiment summary as stable, sorted JSON."""
    try:
        with open(path, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
    except OSError as exc:
        raise IOFailure(path, exc) from exc
    except ValueError as exc:
        raise ValueError(f"summary is not JSON-serializable: {exc}") from exc
