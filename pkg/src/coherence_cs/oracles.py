"""Independent optimality references for the solvers.

The proximal solvers certify themselves with KKT residuals; this module
provides the *other* certificate: a long-run normalized subgradient descent
that shares nothing with the proximal code paths (no prox, no step-size
eigenvalue, no restart logic). Starting from the same zero vector, its best
objective after ~1e6 diminishing steps pins the optimal value tightly
enough to cross-check solver objectives on small instances.

The step schedule is geometric halving: step0 * 0.5^(t // halve_every) with
32 halvings over the run by default. The constants were tuned on 8x12
unit-scale instances to land the best objective within ~1e-10 of optimal;
they are deliberately frozen here rather than exposed as solver knobs.
"""

from . import backend

__all__ = ["reference_objective"]

DEFAULT_STEPS = 1_000_000
DEFAULT_STEP0 = 0.5
HALVINGS = 32


def reference_objective(p, steps=DEFAULT_STEPS, step0=DEFAULT_STEP0):
    """Best objective (and iterate) found by subgradient descent on p.

    Returns (objective, x). Always runs the full step budget; the cost is
    steps * O(mn), so keep instances small (this is a test oracle, not a
    solver).
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    halve_every = max(steps // HALVINGS, 1)
    A = p.A.entries
    if p.model == "lasso":
        return backend.subgrad_l1(A, p.b, p.lam, steps, step0, halve_every)
    if p.model == "group_lasso":
        return backend.subgrad_group(A, p.b, p.A.d, p.lam, steps, step0, halve_every)
    if p.model == "ds_reg":
        M = A.T @ A
        c = A.T @ p.b
        return backend.subgrad_ds(M, c, p.lam, steps, step0, halve_every)
    raise ValueError(f"unknown model {p.model!r}")
