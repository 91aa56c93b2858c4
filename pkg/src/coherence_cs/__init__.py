"""Coherence-based sparse recovery toolkit.

Measurement-matrix coherence diagnostics, closed-form recovery-error
bounds, proximal solvers for three sparse models (l1, correlated-residual
l1, group), and a reproducible certification harness that checks recovered
errors against the bounds.

The numerical kernels run on a compiled extension when it is available and
on a pure-numpy fallback otherwise; see coherence_cs.backend.
"""

from . import backend
from .bounds import (
    BoundSet,
    ScalarFactors,
    block_condition,
    block_recovery_bounds,
    bound_envelopes,
    cone_factors,
    eldar_condition,
    equal_noise_bounds,
    f_func,
    g_func,
    li_chen_condition,
    recovery_bounds,
    sharp_condition,
)
from .errors import (
    CapUnreachable,
    CoherenceCSError,
    ConditionViolated,
    ConfigError,
    DegenerateProjection,
    EnumerationTooLarge,
    IOFailure,
    NotConverged,
    NotNormalized,
    ProxFailure,
    TooFewBlocks,
    TooFewColumns,
    ZeroColumn,
)
from .harness import (
    ExperimentConfig,
    ExperimentRecord,
    emit_csv,
    emit_json,
    load_config,
    run_experiment,
    worker_count,
)
from .matrixlab import (
    CoherenceReport,
    MeasurementMatrix,
    QuasiRipReport,
    block_coherence,
    coherence_report,
    generate_matrix,
    load_matrix,
    mutual_coherence,
    normalize_columns,
    save_matrix,
    spectral_norm,
    sub_coherence,
    verify_quasi_rip,
)
from .oracles import reference_objective
from .signals import (
    NoiseModel,
    SignalSpec,
    best_k_block,
    best_k_term,
    generate_noise,
    generate_signal,
    load_vector,
    mixed_l21_norm,
    save_vector,
    substream_seed,
    tail_norms,
)
from .solvers import (
    Problem,
    ResidualAnalysis,
    SolveResult,
    SolverConfig,
    analyze_residual,
    block_soft_threshold,
    kkt_group_lasso,
    kkt_lasso,
    objective_value,
    soft_threshold,
    solve,
    solve_ds_reg,
    solve_group_lasso,
    solve_lasso,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend",
    # matrixlab
    "MeasurementMatrix",
    "CoherenceReport",
    "QuasiRipReport",
    "normalize_columns",
    "mutual_coherence",
    "block_coherence",
    "sub_coherence",
    "coherence_report",
    "verify_quasi_rip",
    "generate_matrix",
    "spectral_norm",
    "save_matrix",
    "load_matrix",
    # bounds
    "ScalarFactors",
    "BoundSet",
    "f_func",
    "g_func",
    "sharp_condition",
    "block_condition",
    "eldar_condition",
    "li_chen_condition",
    "cone_factors",
    "recovery_bounds",
    "equal_noise_bounds",
    "block_recovery_bounds",
    "bound_envelopes",
    # signals
    "SignalSpec",
    "NoiseModel",
    "substream_seed",
    "generate_signal",
    "best_k_term",
    "best_k_block",
    "generate_noise",
    "tail_norms",
    "mixed_l21_norm",
    "save_vector",
    "load_vector",
    # solvers
    "Problem",
    "SolverConfig",
    "SolveResult",
    "ResidualAnalysis",
    "soft_threshold",
    "block_soft_threshold",
    "objective_value",
    "kkt_lasso",
    "kkt_group_lasso",
    "solve_lasso",
    "solve_group_lasso",
    "solve_ds_reg",
    "solve",
    "analyze_residual",
    "reference_objective",
    # harness
    "ExperimentConfig",
    "ExperimentRecord",
    "load_config",
    "run_experiment",
    "emit_csv",
    "emit_json",
    "worker_count",
    # errors
    "CoherenceCSError",
    "ZeroColumn",
    "NotNormalized",
    "TooFewColumns",
    "TooFewBlocks",
    "EnumerationTooLarge",
    "CapUnreachable",
    "ConditionViolated",
    "DegenerateProjection",
    "NotConverged",
    "ProxFailure",
    "ConfigError",
    "IOFailure",
]
