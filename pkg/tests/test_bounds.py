import math

import numpy as np
import pytest

from coherence_cs import (
    ConditionViolated,
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


# ---------------------------------------------------------------------------
# scalar polynomials


def test_f_g_at_zero():
    assert f_func(1.0, 0.0) == 3.0
    assert g_func(1.0, 0.0) == 1.0


def test_f_hand_values():
    assert f_func(4.0, 1.0) == 13.0
    # 0.5 + 3*sqrt(2)*0.5 + 3, evaluated independently
    np.testing.assert_allclose(f_func(2.0, 0.5), 5.621320343559643, rtol=1e-15)


def test_g_hand_value():
    # 2*3*4 + 4*sqrt(3)*2 + 1
    np.testing.assert_allclose(g_func(3.0, 2.0), 24.0 + 8.0 * math.sqrt(3.0) + 1.0, rtol=1e-15)


def test_f_g_domain():
    for fn in (f_func, g_func):
        with pytest.raises(ValueError):
            fn(0.0, 1.0)
        with pytest.raises(ValueError):
            fn(-1.0, 1.0)
        with pytest.raises(ValueError):
            fn(1.0, -0.1)


# ---------------------------------------------------------------------------
# recovery conditions


def test_sharp_condition_values():
    assert sharp_condition(2, 0.33)
    assert not sharp_condition(2, 1.0 / 3.0)  # strict at the boundary
    assert sharp_condition(1, 0.99)
    assert not sharp_condition(3, 0.21)


def test_li_chen_is_strictly_more_restrictive():
    # threshold at k=2 is 2/(sqrt(3)*8) ~ 0.14434 < 1/3
    assert li_chen_condition(2, 0.14)
    assert sharp_condition(2, 0.14)
    assert not li_chen_condition(2, 0.2)
    assert sharp_condition(2, 0.2)
    for k in range(1, 30):
        thr_li = 2.0 / (math.sqrt(3.0) * (5 * k - 2))
        thr_sharp = 1.0 / (2 * k - 1)
        assert thr_li < thr_sharp
        mid = 0.5 * (thr_li + thr_sharp)
        assert sharp_condition(k, mid) and not li_chen_condition(k, mid)


def test_li_chen_value_at_k2():
    assert li_chen_condition(2, 0.1443)
    assert not li_chen_condition(2, 0.1444)


def test_block_condition_reduces_and_bounds():
    assert block_condition(2, 1, 0.33) == sharp_condition(2, 0.33)
    assert block_condition(2, 2, 0.16)
    assert not block_condition(2, 2, 1.0 / 6.0)


def test_eldar_condition_nonstrict():
    # nu = 0 boundary: equality counts as satisfied
    assert eldar_condition(2, 2, 1.0 / 6.0, 0.0)
    assert not eldar_condition(2, 2, 1.0 / 6.0 + 1e-12, 0.0)
    # positive sub-coherence tightens the threshold
    assert not eldar_condition(2, 2, 1.0 / 6.0, 0.5)


def test_condition_input_validation():
    with pytest.raises(ValueError):
        sharp_condition(0, 0.1)
    with pytest.raises(ValueError):
        sharp_condition(2, -0.1)
    with pytest.raises(ValueError):
        block_condition(2, 0, 0.1)


# ---------------------------------------------------------------------------
# cone factors


def test_cone_factors_mu_zero():
    fac = cone_factors(2, 0.0)
    assert fac.alpha1 == 1.0
    assert fac.alpha2 == 0.0


def test_cone_factors_frozen_values():
    fac = cone_factors(2, 0.2)
    np.testing.assert_allclose(fac.alpha1, 1.369306393762915, rtol=1e-15)
    np.testing.assert_allclose(fac.alpha2, 0.3535533905932738, rtol=1e-15)


def test_cone_factors_domain():
    with pytest.raises(ConditionViolated):
        cone_factors(3, 0.5)  # 1/(k-1) = 0.5, strict
    with pytest.raises(ConditionViolated):
        cone_factors(1, 0.0)
    with pytest.raises(ValueError):
        cone_factors(2, -0.2)


def test_cone_factors_monotone_in_mu():
    # acceptance-grade grids live in test_acceptance; spot-check here
    for k in (2, 5):
        grid = np.linspace(0.0, 1.0 / (k - 1) - 1e-6, 200)
        a1 = [cone_factors(k, float(m)).alpha1 for m in grid]
        a2 = [cone_factors(k, float(m)).alpha2 for m in grid]
        assert all(x < y for x, y in zip(a1, a1[1:]))
        assert all(x < y for x, y in zip(a2, a2[1:]))


# ---------------------------------------------------------------------------
# recovery bounds


def test_recovery_bounds_mu_zero_frozen():
    bset = recovery_bounds(2, 0.0, 1.0, 1.0)
    np.testing.assert_allclose(bset.C1, 0.8284271247461902, rtol=1e-15)
    np.testing.assert_allclose(bset.C2, 4.82842712474619, rtol=1e-15)
    assert bset.alpha1 == 1.0 and bset.alpha2 == 0.0


def test_recovery_bounds_condition_message():
    with pytest.raises(ConditionViolated, match=r"condition violated: mu >= 1/\(2k-1\)"):
        recovery_bounds(2, 0.4, 1.0, 1.0)


def test_recovery_bounds_all_positive():
    rng = np.random.default_rng(0)
    for _ in range(200):
        k = int(rng.integers(2, 20))
        mu = float(rng.uniform(0.0, 1.0 / (2 * k - 1) * 0.999))
        lam = float(rng.uniform(0.01, 10.0))
        eps = float(rng.uniform(0.0, 10.0))
        bset = recovery_bounds(k, mu, lam, eps)
        assert bset.C1 > 0 and bset.C2 > 0 and bset.C3 > 0 and bset.C4 > 0


def test_recovery_bounds_variant_ordering():
    # the proof variant doubles the epsilon coefficient inside C4
    for eps in (0.5, 1.0, 3.0):
        proof = recovery_bounds(3, 0.1, 1.0, eps, variant="proof")
        stmt = recovery_bounds(3, 0.1, 1.0, eps, variant="statement")
        assert proof.C4 > stmt.C4
        for name in ("C1", "C2", "C3"):
            assert getattr(proof, name) == getattr(stmt, name)
    proof0 = recovery_bounds(3, 0.1, 1.0, 0.0, variant="proof")
    stmt0 = recovery_bounds(3, 0.1, 1.0, 0.0, variant="statement")
    assert proof0.C4 == stmt0.C4


def test_recovery_bounds_input_validation():
    with pytest.raises(ValueError):
        recovery_bounds(2, 0.1, 0.0, 1.0)
    with pytest.raises(ValueError):
        recovery_bounds(2, 0.1, 1.0, -1.0)
    with pytest.raises(ValueError):
        recovery_bounds(2, 0.1, 1.0, 1.0, variant="other")


# ---------------------------------------------------------------------------
# equal-noise (hat) constants


def test_equal_noise_matches_scaled_recovery_bounds():
    rng = np.random.default_rng(1)
    for _ in range(30):
        k = int(rng.integers(2, 30))
        mu = float(rng.uniform(0.0, 0.999 / (2 * k - 1)))
        lam = float(rng.uniform(0.05, 5.0))
        for variant in ("statement", "proof"):
            full = recovery_bounds(k, mu, lam, lam, variant=variant)
            hat = equal_noise_bounds(k, mu, variant=variant)
            np.testing.assert_allclose(full.C1, hat.C1, rtol=1e-12)
            np.testing.assert_allclose(full.C2, lam * hat.C2, rtol=1e-12)
            np.testing.assert_allclose(full.C3, hat.C3, rtol=1e-12)
            np.testing.assert_allclose(full.C4, lam * hat.C4, rtol=1e-12)


def test_equal_noise_default_variant_is_statement():
    assert equal_noise_bounds(2, 0.1).variant == "statement"
    assert recovery_bounds(2, 0.1, 1.0, 1.0).variant == "proof"


# ---------------------------------------------------------------------------
# block bounds


def test_block_bounds_d1_reduction_exact():
    for k, mu in [(2, 0.2), (3, 0.15), (5, 0.05)]:
        a = block_recovery_bounds(k, 1, mu, 0.7, 0.3)
        b = recovery_bounds(k, mu, 0.7, 0.3)
        assert (a.C1, a.C2, a.C3, a.C4) == (b.C1, b.C2, b.C3, b.C4)


def test_block_bounds_frozen_factors():
    bset = block_recovery_bounds(2, 2, 0.05, 1.0, 1.0)
    np.testing.assert_allclose(bset.alpha1, 1.1653431646335017, rtol=1e-15)
    np.testing.assert_allclose(bset.alpha2, 0.15713484026367724, rtol=1e-15)
    assert bset.mu_eff == 0.1


def test_block_bounds_condition_message():
    with pytest.raises(ConditionViolated, match=r"mu_b >= 1/\(\(2k-1\)d\)"):
        block_recovery_bounds(2, 2, 0.2, 1.0, 1.0)


# ---------------------------------------------------------------------------
# envelopes


def test_envelope_k4_first_is_one():
    e1, _, _, _ = bound_envelopes(4, 0.05)
    assert e1 == 1.0


def test_envelope_frozen_value():
    _, _, e3, _ = bound_envelopes(2, 0.2)
    np.testing.assert_allclose(e3, 60.62177826491069, rtol=1e-14)


def test_envelopes_dominate_hat_constants():
    # spot grid here; the full k=2..50 sweep runs in the acceptance suite
    for k in (2, 3, 8, 20):
        for q in (0.1, 0.9):
            mu = q / (2 * k - 1)
            hat = equal_noise_bounds(k, mu, variant="statement")
            e1, e2, e3, e4 = bound_envelopes(k, mu)
            assert hat.C1 < e1
            assert hat.C2 < e2
            assert hat.C3 < e3
            assert hat.C4 < e4


def test_envelopes_condition():
    with pytest.raises(ConditionViolated):
        bound_envelopes(2, 0.5)
