"""Proximal solvers for the three recovery models, with KKT certificates.

Models (A has unit-norm columns in the intended use, but nothing here
requires it):

* lasso:        min ||x||_1     + ||b - Ax||_2^2 / (2 lambda)
* ds_reg:       min ||x||_1     + ||A^T(b - Ax)||_inf^2 / (2 lambda)
* group_lasso:  min ||x||_2,1   + ||b - Ax||_2^2 / (2 lambda)

lasso and group_lasso run accelerated proximal gradient (step 1/L from a
power-method eigenvalue, monotone restart) and certify optimality by the
KKT residual of the model. ds_reg runs a linearized operator-splitting
iteration on the equivalent constrained form

    min ||x||_1 + ||y||_inf^2 / (2 lambda)   s.t.   y = A^T(b - Ax),

where the inf-norm-squared prox is evaluated exactly through the prox of
the squared l1 norm (Moreau decomposition, sort-based). Its certificate is
the combined primal/dual splitting residual, which vanishes exactly at a
KKT point of the model.

Every solve is deterministic in (Problem, SolverConfig) and single
threaded; distinct solves may run concurrently.
"""

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import NotConverged, ProxFailure
from .matrixlab import MeasurementMatrix, spectral_norm
from .signals import best_k_block, best_k_term, mixed_l21_norm

__all__ = [
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
]

MODELS = ("lasso", "ds_reg", "group_lasso")


@dataclass(frozen=True)
class Problem:
    """One model instance: matrix, measurements, penalty, model name.

    For group_lasso the block width is taken from A.d.
    """

    A: MeasurementMatrix
    b: np.ndarray
    lam: float
    model: str = "lasso"

    def __post_init__(self):
        b = np.ascontiguousarray(self.b, dtype=np.float64)
        if b.ndim != 1 or b.size != self.A.m:
            raise ValueError(
                f"b must be a vector of length m = {self.A.m}, got shape {b.shape}"
            )
        if not np.isfinite(b).all():
            raise ValueError("b must be finite")
        if self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class SolverConfig:
    """Iteration limits and certificate tolerance shared by the solvers.

    lipschitz optionally carries a precomputed largest eigenvalue of A^T A
    (the harness reuses one per matrix); left None it is computed by the
    power method. rho/balance_every tune the splitting solver only.
    """

    tolerance: float = 1e-8
    max_iters: int = 100_000
    history_cap: int = 1000
    lipschitz: float = None
    rho: float = 1.0
    balance_every: int = 50

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.history_cap < 0:
            raise ValueError(f"history_cap must be >= 0, got {self.history_cap}")
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.balance_every < 1:
            raise ValueError(f"balance_every must be >= 1, got {self.balance_every}")


@dataclass(frozen=True)
class SolveResult:
    """Solver output: the minimizer, certificate, and bookkeeping.

    history holds the first history_cap per-iteration objective values.
    constraint_residual and rho_final are filled by the splitting solver
    only (the final ||y - A^T(b - Ax)||_inf and penalty parameter).
    """

    x_sharp: np.ndarray
    objective: float
    iterations: int
    kkt_residual: float
    converged: bool
    history: np.ndarray = field(repr=False, default=None)
    constraint_residual: float = None
    rho_final: float = None


@dataclass(frozen=True)
class ResidualAnalysis:
    """Decomposition of a recovery error h = x_sharp - x_true.

    E indexes the entries (blocks when d > 1) kept by the best k-term
    (k-block) approximation of the true signal; E1 indexes the k largest
    remaining entries (blocks) of h. meas_error/ds_error/sig_error are
    ||Ah||_2, ||A^T A h||_inf, ||h||_2.
    """

    h: np.ndarray
    E: tuple
    E1: tuple
    meas_error: float
    ds_error: float
    sig_error: float
    k: int
    d: int


def soft_threshold(v, tau):
    """Entrywise shrinkage sign(v) * max(|v| - tau, 0)."""
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def block_soft_threshold(v, tau, d):
    """Blockwise shrinkage: scale each d-block by max(1 - tau/||block||, 0).

    Blocks with norm <= 1e-14 map to zero (removable singularity). With
    d = 1 this delegates to soft_threshold, so the reduction is exact down
    to the last bit.
    """
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    v = np.asarray(v, dtype=float)
    if d < 1 or v.size % d != 0:
        raise ValueError(f"block size {d} does not divide n = {v.size}")
    if d == 1:
        return soft_threshold(v, tau)
    blocks = v.reshape(-1, d)
    norms = np.sqrt((blocks * blocks).sum(axis=1))
    scale = np.maximum(1.0 - tau / np.maximum(norms, 1e-300), 0.0)
    scale[norms <= 1e-14] = 0.0
    return (blocks * scale[:, None]).reshape(-1)


def objective_value(p, x):
    """The model objective at x."""
    x = np.asarray(x, dtype=float)
    A = p.A.entries
    if p.model == "ds_reg":
        w = A.T @ (p.b - A @ x)
        return float(np.abs(x).sum()) + 0.5 * float(np.abs(w).max() ** 2) / p.lam
    r = p.b - A @ x
    data = 0.5 * float(r @ r) / p.lam
    if p.model == "group_lasso":
        return mixed_l21_norm(x, p.A.d) + data
    return float(np.abs(x).sum()) + data


def kkt_lasso(p, x):
    """First-order optimality residual of the l1 model at x.

    With g = (1/lambda) A^T (b - Ax): the max of |g_i - sign(x_i)| over the
    support and of max(|g_i| - 1, 0) off it. Zero iff x is optimal.
    """
    x = np.asarray(x, dtype=float)
    g = p.A.entries.T @ (p.b - p.A.entries @ x) / p.lam
    on = x != 0.0
    r_on = float(np.abs(g[on] - np.sign(x[on])).max(initial=0.0))
    r_off = float((np.abs(g[~on]) - 1.0).max(initial=0.0))
    return max(r_on, r_off)


def kkt_group_lasso(p, x):
    """Blockwise optimality residual of the mixed-norm model at x."""
    x = np.asarray(x, dtype=float)
    d = p.A.d
    g = (p.A.entries.T @ (p.b - p.A.entries @ x) / p.lam).reshape(-1, d)
    xb = x.reshape(-1, d)
    xn = np.sqrt((xb * xb).sum(axis=1))
    gn = np.sqrt((g * g).sum(axis=1))
    on = xn > 0.0
    r_on = 0.0
    if on.any():
        diff = g[on] - xb[on] / xn[on, None]
        r_on = float(np.sqrt((diff * diff).sum(axis=1)).max())
    r_off = float((gn[~on] - 1.0).max(initial=0.0))
    return max(r_on, r_off)


def _gram_eig_max(p, cfg):
    if cfg.lipschitz is not None:
        if cfg.lipschitz <= 0:
            raise ValueError(f"lipschitz must be positive, got {cfg.lipschitz}")
        return float(cfg.lipschitz)
    return spectral_norm(p.A.entries) ** 2


def _finish(p, x, iters, kkt, converged, history, **extra):
    result = SolveResult(
        x_sharp=x,
        objective=objective_value(p, x),
        iterations=int(iters),
        kkt_residual=float(kkt),
        converged=bool(converged),
        history=np.asarray(history, dtype=float),
        **extra,
    )
    if not converged:
        raise NotConverged(result)
    return result


def solve_lasso(p, cfg=SolverConfig()):
    """Accelerated proximal gradient for the l1 model.

    Stops when kkt_lasso(p, x) <= cfg.tolerance; raises NotConverged (with
    the best iterate attached) at cfg.max_iters otherwise.
    """
    if p.model != "lasso":
        raise ValueError(f"solve_lasso got model {p.model!r}")
    lip = _gram_eig_max(p, cfg)
    x, iters, kkt, ok, hist = backend.fista_l1(
        p.A.entries, p.b, p.lam, lip, cfg.tolerance, cfg.max_iters, cfg.history_cap
    )
    return _finish(p, x, iters, kkt, ok, hist)


def solve_group_lasso(p, cfg=SolverConfig()):
    """Accelerated proximal gradient for the mixed-norm model."""
    if p.model != "group_lasso":
        raise ValueError(f"solve_group_lasso got model {p.model!r}")
    lip = _gram_eig_max(p, cfg)
    x, iters, kkt, ok, hist = backend.fista_group(
        p.A.entries,
        p.b,
        p.A.d,
        p.lam,
        lip,
        cfg.tolerance,
        cfg.max_iters,
        cfg.history_cap,
    )
    return _finish(p, x, iters, kkt, ok, hist)


def solve_ds_reg(p, cfg=SolverConfig()):
    """Linearized splitting solver for the correlated-residual model.

    Works on M = A^T A and c = A^T b. Each iteration takes a linearized
    l1 step on x (majorizer eta >= ||M||_2^2), an exact inf-norm-squared
    prox on y via Moreau through the squared-l1 prox, and a dual update.
    The penalty rho starts at cfg.rho and is rebalanced by factors of 2
    every cfg.balance_every iterations when the primal and dual residuals
    drift more than a decade apart.

    The reported kkt_residual is the combined splitting residual
    max(||Mx + y - c||_inf, rho*||M(y' - y)||_inf, rho*eta*||x' - x||_inf),
    which vanishes exactly at a KKT point of the model.
    """
    if p.model != "ds_reg":
        raise ValueError(f"solve_ds_reg got model {p.model!r}")
    A = p.A.entries
    M = A.T @ A
    c = A.T @ p.b
    n = M.shape[0]
    gram_eig = _gram_eig_max(p, cfg)
    eta = gram_eig * gram_eig  # ||M||_2^2
    rho = cfg.rho
    x = np.zeros(n)
    y = c.copy()  # feasible start: y = c - Mx at x = 0
    u = np.zeros(n)
    q = np.zeros(n)  # M @ x, carried between iterations
    hist = []
    kkt = np.inf
    prim_inf = np.inf
    it = 0
    converged = False
    for it in range(1, cfg.max_iters + 1):
        drift = q + y - c + u
        x_new = soft_threshold(x - (M @ drift) / eta, 1.0 / (rho * eta))
        q_new = M @ x_new
        v = c - q_new - u
        y_prox, selfcheck = backend.prox_sql1(v, p.lam * rho)
        if selfcheck > 1e-10:
            raise ProxFailure(
                f"squared-l1 prox fixed-point violation {selfcheck:.3e} > 1e-10"
            )
        y_new = v - y_prox
        resid = q_new + y_new - c
        u = u + resid
        prim_inf = float(np.abs(resid).max(initial=0.0))
        dual_y = rho * float(np.abs(M @ (y_new - y)).max(initial=0.0))
        dual_x = rho * eta * float(np.abs(x_new - x).max(initial=0.0))
        kkt = max(prim_inf, dual_y, dual_x)
        x, y, q = x_new, y_new, q_new
        if len(hist) < cfg.history_cap:
            w = c - q
            hist.append(
                float(np.abs(x).sum()) + 0.5 * float(np.abs(w).max() ** 2) / p.lam
            )
        if kkt <= cfg.tolerance:
            converged = True
            break
        if it % cfg.balance_every == 0:
            dual = max(dual_y, dual_x)
            if prim_inf > 10.0 * dual:
                rho *= 2.0
                u /= 2.0
            elif dual > 10.0 * prim_inf:
                rho /= 2.0
                u *= 2.0
    return _finish(
        p,
        x,
        it,
        kkt,
        converged,
        hist,
        constraint_residual=prim_inf,
        rho_final=rho,
    )


def solve(p, cfg=SolverConfig()):
    """Dispatch to the solver matching p.model."""
    if p.model == "lasso":
        return solve_lasso(p, cfg)
    if p.model == "group_lasso":
        return solve_group_lasso(p, cfg)
    return solve_ds_reg(p, cfg)


def analyze_residual(x_true, x_sharp, A, k, d=1):
    """Split the error h = x_sharp - x_true around the dominant support.

    E is the support of the best k-term approximation of x_true (block
    indices when d > 1); E1 collects the k largest entries (blocks) of h
    outside E. The three norms reported are the measurement-side error
    ||Ah||_2, the correlated-residual error ||A^T A h||_inf, and the
    signal-side error ||h||_2.
    """
    x_true = np.asarray(x_true, dtype=float)
    x_sharp = np.asarray(x_sharp, dtype=float)
    if x_true.shape != x_sharp.shape or x_true.size != A.n:
        raise ValueError(
            f"shape mismatch: x_true {x_true.shape}, x_sharp {x_sharp.shape}, n={A.n}"
        )
    h = x_sharp - x_true
    if d == 1:
        approx = best_k_term(x_true, k)
        E = np.nonzero(approx)[0]
        h_masked = np.abs(h)
        h_masked[E] = -1.0  # sorts E to the back so the top-k picks from E^c
        order = np.argsort(-h_masked, kind="stable")
        E1 = order[: min(k, x_true.size - E.size)]
    else:
        approx = best_k_block(x_true, k, d)
        block_norm = np.sqrt((approx.reshape(-1, d) ** 2).sum(axis=1))
        E = np.nonzero(block_norm)[0]
        h_norms = np.sqrt((h.reshape(-1, d) ** 2).sum(axis=1))
        h_norms[E] = -1.0
        order = np.argsort(-h_norms, kind="stable")
        E1 = order[: min(k, h_norms.size - E.size)]
    Ah = A.entries @ h
    AtAh = A.entries.T @ Ah
    return ResidualAnalysis(
        h=h,
        E=tuple(int(i) for i in E),
        E1=tuple(int(i) for i in E1),
        meas_error=float(np.linalg.norm(Ah)),
        ds_error=float(np.abs(AtAh).max(initial=0.0)),
        sig_error=float(np.linalg.norm(h)),
        k=int(k),
        d=int(d),
    )
