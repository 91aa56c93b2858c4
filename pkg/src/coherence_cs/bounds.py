"""Closed-form recovery conditions, cone factors, and error-bound constants.

Everything here is plain scalar arithmetic on (k, coherence, lambda,
epsilon). The geometry enters through two ingredients:

* a sparsity-vs-coherence condition (``sharp_condition`` and friends) that
  decides whether uniform recovery is guaranteed at all, and
* the cone factors alpha1/alpha2 controlling how much of a perturbation's
  energy can hide on a size-k support.

From those, ``recovery_bounds`` assembles the four constants (C1..C4) that
turn a signal's k-term tail into certified measurement-side and
signal-side error bounds:

    measurement error <= C1 * tail + C2        signal error <= C3 * tail + C4

Block-structured variants reuse the same algebra with the effective
coherence d * mu_B in place of mu.
"""

import math
from dataclasses import dataclass

from .errors import ConditionViolated

__all__ = [
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
]


@dataclass(frozen=True)
class ScalarFactors:
    """Cone factors for a (sparsity, effective coherence) pair.

    mu_eff is the plain mutual coherence for unstructured recovery and
    d * mu_B for block recovery. Defined only for k >= 2 and
    mu_eff < 1/(k-1).
    """

    k: int
    mu_eff: float
    alpha1: float
    alpha2: float


@dataclass(frozen=True)
class BoundSet:
    """The four error-bound constants plus the inputs they were built from."""

    C1: float
    C2: float
    C3: float
    C4: float
    alpha1: float
    alpha2: float
    k: int
    mu_eff: float
    lam: float
    epsilon: float
    variant: str


def f_func(a, x):
    """Quadratic envelope polynomial a*x^2 + 3*sqrt(a)*x + 3 (enters C3)."""
    if a <= 0:
        raise ValueError(f"f_func needs a > 0, got {a}")
    if x < 0:
        raise ValueError(f"f_func needs x >= 0, got {x}")
    return a * x * x + 3.0 * math.sqrt(a) * x + 3.0


def g_func(a, x):
    """Quadratic envelope polynomial 2*a*x^2 + 4*sqrt(a)*x + 1 (enters C4)."""
    if a <= 0:
        raise ValueError(f"g_func needs a > 0, got {a}")
    if x < 0:
        raise ValueError(f"g_func needs x >= 0, got {x}")
    return 2.0 * a * x * x + 4.0 * math.sqrt(a) * x + 1.0


def _check_kdmu(k, d, *coherences):
    if k < 1:
        raise ValueError(f"sparsity k must be >= 1, got {k}")
    if d < 1:
        raise ValueError(f"block size d must be >= 1, got {d}")
    for c in coherences:
        if c < 0:
            raise ValueError(f"coherence must be nonnegative, got {c}")


def sharp_condition(k, mu):
    """Uniform k-sparse recovery condition mu < 1/(2k-1) (strict)."""
    _check_kdmu(k, 1, mu)
    return mu < 1.0 / (2 * k - 1)


def block_condition(k, d, mu_b):
    """Block k-sparse recovery condition mu_B < 1/((2k-1)d) (strict)."""
    _check_kdmu(k, d, mu_b)
    return mu_b < 1.0 / ((2 * k - 1) * d)


def eldar_condition(k, d, mu_b, nu):
    """Block condition with sub-coherence: mu_B <= (1-(d-1)nu)/((2k-1)d).

    Non-strict, as the inequality is usually stated; the strict version is
    tracked separately by the coherence report.
    """
    _check_kdmu(k, d, mu_b, nu)
    return mu_b <= (1.0 - (d - 1) * nu) / ((2 * k - 1) * d)


def li_chen_condition(k, mu):
    """The stronger condition mu < 2/(sqrt(3)*(5k-2)) from prior work."""
    _check_kdmu(k, 1, mu)
    return mu < 2.0 / (math.sqrt(3.0) * (5 * k - 2))


def cone_factors(k, mu_eff):
    """Factors (alpha1, alpha2) bounding ||h_E||_2 by the cone inequality

        ||h_E||_2 <= alpha1 * ||A h||_2 + alpha2 * ||h_{E^c}||_1

    for any h and any support E with |E| = k. Requires k >= 2 and
    mu_eff < 1/(k-1); raises ConditionViolated otherwise.
    """
    if k < 2:
        raise ConditionViolated(f"cone factors need k >= 2, got k={k}")
    if mu_eff < 0:
        raise ValueError(f"coherence must be nonnegative, got {mu_eff}")
    if mu_eff >= 1.0 / (k - 1):
        raise ConditionViolated(
            f"cone factors need mu_eff < 1/(k-1) = {1.0 / (k - 1):.6g}, "
            f"got {mu_eff:.6g}"
        )
    denom = 1.0 - (k - 1) * mu_eff
    alpha1 = math.sqrt(1.0 + (k - 1) * mu_eff) / denom
    alpha2 = math.sqrt(k) * mu_eff / denom
    return ScalarFactors(k=k, mu_eff=mu_eff, alpha1=alpha1, alpha2=alpha2)


def _assemble(k, mu_eff, lam, eps, variant):
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if eps < 0:
        raise ValueError(f"epsilon must be nonnegative, got {eps}")
    if variant not in ("statement", "proof"):
        raise ValueError(f"variant must be 'statement' or 'proof', got {variant!r}")
    fac = cone_factors(k, mu_eff)
    rk = math.sqrt(k)
    a1, a2 = fac.alpha1, fac.alpha2
    room = 1.0 - rk * a2  # positive whenever the sharp condition holds
    if room <= 0:
        raise ConditionViolated(
            f"1 - sqrt(k)*alpha2 = {room:.6g} <= 0 at k={k}, mu_eff={mu_eff:.6g}"
        )
    base = rk * a1 * lam + eps
    c4_eps = 1.0 if variant == "statement" else 2.0
    C1 = 2.0 * lam / base
    C2 = 2.0 * base
    C3 = (2.0 * rk * a1 * f_func(k, a2) * lam + 2.0 * g_func(k, a2) * eps) / (
        rk * room * base
    )
    C4 = (
        (rk * a1 * (5.0 + 2.0 * rk * a2) * lam + c4_eps * g_func(k, a2) * eps)
        * base
        / (rk * room * lam)
    )
    return BoundSet(
        C1=C1,
        C2=C2,
        C3=C3,
        C4=C4,
        alpha1=a1,
        alpha2=a2,
        k=k,
        mu_eff=mu_eff,
        lam=lam,
        epsilon=eps,
        variant=variant,
    )


def recovery_bounds(k, mu, lam, eps, variant="proof"):
    """Error-bound constants for l2-noise recovery at sparsity k.

    Requires the sharp condition mu < 1/(2k-1). With h the difference
    between the recovered and true signals and tail the l1 norm of the
    true signal's k-term tail:

        ||A h||_2 <= C1 * tail + C2       ||h||_2 <= C3 * tail + C4

    The same constants certify the correlated-residual model, with
    ||A^T A h||_inf on the measurement side. variant selects the
    coefficient of the epsilon term inside C4 (see equal_noise_bounds):
    'proof' is the larger, safe-for-certification choice.
    """
    if not sharp_condition(k, mu):
        raise ConditionViolated("condition violated: mu >= 1/(2k-1)")
    return _assemble(k, mu, lam, eps, variant)


def equal_noise_bounds(k, mu, variant="statement"):
    """Normalized constants for the coupled noise level eps = lambda.

    At eps = lambda the bounds collapse to lambda-free constants
    (C1 and C3 unchanged, C2 and C4 divided by lambda). Computed here from
    the independent hat formulas rather than by delegation, so cross-checks
    against recovery_bounds are meaningful.
    """
    if not sharp_condition(k, mu):
        raise ConditionViolated("condition violated: mu >= 1/(2k-1)")
    if variant not in ("statement", "proof"):
        raise ValueError(f"variant must be 'statement' or 'proof', got {variant!r}")
    fac = cone_factors(k, mu)
    rk = math.sqrt(k)
    a1, a2 = fac.alpha1, fac.alpha2
    room = 1.0 - rk * a2
    if room <= 0:
        raise ConditionViolated(
            f"1 - sqrt(k)*alpha2 = {room:.6g} <= 0 at k={k}, mu={mu:.6g}"
        )
    c4_eps = 1.0 if variant == "statement" else 2.0
    C1 = 2.0 / (rk * a1 + 1.0)
    C2 = 2.0 * (rk * a1 + 1.0)
    C3 = (2.0 * rk * a1 * f_func(k, a2) + 2.0 * g_func(k, a2)) / (
        rk * room * (rk * a1 + 1.0)
    )
    C4 = (rk * a1 * (5.0 + 2.0 * rk * a2) + c4_eps * g_func(k, a2)) * (
        rk * a1 + 1.0
    ) / (rk * room)
    return BoundSet(
        C1=C1,
        C2=C2,
        C3=C3,
        C4=C4,
        alpha1=a1,
        alpha2=a2,
        k=k,
        mu_eff=mu,
        lam=1.0,
        epsilon=1.0,
        variant=variant,
    )


def block_recovery_bounds(k, d, mu_b, lam, eps, variant="proof"):
    """Error-bound constants for block k-sparse recovery.

    Same algebra as recovery_bounds with effective coherence d * mu_B and
    the block condition mu_B < 1/((2k-1)d); the tail is then measured in
    the mixed l2/l1 norm. With d = 1 this reduces exactly to
    recovery_bounds. Assumes orthonormal blocks (the harness checks that
    on the matrix; this function only sees scalars).
    """
    if not block_condition(k, d, mu_b):
        raise ConditionViolated("condition violated: mu_b >= 1/((2k-1)d)")
    return _assemble(k, d * mu_b, lam, eps, variant)


def bound_envelopes(k, mu):
    """Rough closed-form upper envelopes for the equal-noise constants.

    Returns (e1, e2, e3, e4) with e1 = 2/sqrt(k), e2 = 2(sqrt(6)+1)sqrt(k),
    e3 = 14*sqrt(6)/(sqrt(k)(1-(2k-1)mu)), e4 = 7(sqrt(6)+1)^2 sqrt(k) /
    (1-(2k-1)mu). Each strictly dominates the corresponding hat constant
    under the sharp condition.
    """
    if not sharp_condition(k, mu):
        raise ConditionViolated("condition violated: mu >= 1/(2k-1)")
    rk = math.sqrt(k)
    r6 = math.sqrt(6.0)
    slack = 1.0 - (2 * k - 1) * mu
    e1 = 2.0 / rk
    e2 = 2.0 * (r6 + 1.0) * rk
    e3 = 14.0 * r6 / (rk * slack)
    e4 = 7.0 * (r6 + 1.0) ** 2 * rk / slack
    return e1, e2, e3, e4
