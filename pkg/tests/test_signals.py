import itertools
import math

import numpy as np
import pytest

from coherence_cs import (
    NoiseModel,
    NotNormalized,
    SignalSpec,
    best_k_block,
    best_k_term,
    generate_matrix,
    generate_noise,
    generate_signal,
    load_vector,
    mixed_l21_norm,
    save_vector,
    substream_seed,
    tail_norms,
)


# ---------------------------------------------------------------------------
# substreams


def test_substream_deterministic_and_distinct():
    a = substream_seed(42, 1, 7)
    assert a == substream_seed(42, 1, 7)
    assert a != substream_seed(42, 1, 8)
    assert a != substream_seed(42, 2, 7)
    assert a != substream_seed(43, 1, 7)
    assert 0 <= a < 2**64


# ---------------------------------------------------------------------------
# signal generation


def test_sparse_degenerate_k():
    assert not generate_signal(SignalSpec(n=6, k=0)).any()
    x = generate_signal(SignalSpec(n=6, k=6, seed=3))
    assert np.count_nonzero(x) == 6


def test_sparse_support_size_and_unit_magnitudes():
    x = generate_signal(SignalSpec(n=30, k=5, seed=1))
    assert np.count_nonzero(x) == 5
    np.testing.assert_array_equal(np.abs(x[x != 0]), 1.0)


def test_uniform_magnitudes_in_range():
    spec = SignalSpec(n=50, k=10, magnitude="uniform", lo=0.5, hi=1.5, seed=2)
    x = generate_signal(spec)
    mags = np.abs(x[x != 0])
    assert mags.size == 10
    assert (mags >= 0.5).all() and (mags <= 1.5).all()


def test_block_sparse_counts_blocks():
    spec = SignalSpec(n=12, structure="block_sparse", k=2, d=3, seed=0)
    x = generate_signal(spec)
    norms = np.sqrt((x.reshape(4, 3) ** 2).sum(axis=1))
    assert np.count_nonzero(norms) == 2


def test_compressible_magnitudes_are_permuted_power_law():
    spec = SignalSpec(n=40, structure="compressible", decay_exponent=2.0, seed=5)
    x = generate_signal(spec)
    expected = np.arange(1, 41, dtype=float) ** -2.0
    np.testing.assert_allclose(np.sort(np.abs(x))[::-1], expected, rtol=1e-15)


def test_signal_determinism():
    spec = SignalSpec(n=20, k=4, seed=9)
    np.testing.assert_array_equal(generate_signal(spec), generate_signal(spec))
    other = SignalSpec(n=20, k=4, seed=10)
    assert (generate_signal(spec) != generate_signal(other)).any()


def test_signal_spec_validation():
    with pytest.raises(ValueError):
        SignalSpec(n=0)
    with pytest.raises(ValueError):
        SignalSpec(n=10, structure="spiky")
    with pytest.raises(ValueError):
        SignalSpec(n=10, k=11)
    with pytest.raises(ValueError):
        SignalSpec(n=10, structure="block_sparse", k=2, d=3)
    with pytest.raises(ValueError):
        SignalSpec(n=10, structure="compressible", decay_exponent=0.0)
    with pytest.raises(ValueError):
        SignalSpec(n=10, k=2, magnitude="uniform", lo=0.0, hi=1.0)


# ---------------------------------------------------------------------------
# best k-term / k-block approximations


def test_best_k_term_hand_case():
    np.testing.assert_array_equal(best_k_term([3.0, -1.0, 2.0], 2), [3.0, 0.0, 2.0])


def test_best_k_term_degenerate():
    x = np.array([1.0, -2.0, 0.5])
    assert not best_k_term(x, 0).any()
    np.testing.assert_array_equal(best_k_term(x, 3), x)


def test_best_k_term_tie_breaks_low_index():
    np.testing.assert_array_equal(best_k_term([1.0, -1.0, 1.0], 2), [1.0, -1.0, 0.0])


def test_best_k_term_is_closest_by_enumeration():
    rng = np.random.default_rng(12)
    for _ in range(20):
        x = rng.standard_normal(9)
        out = best_k_term(x, 3)
        achieved = np.linalg.norm(out - x)
        best = min(
            np.linalg.norm(x - _keep(x, S)) for S in itertools.combinations(range(9), 3)
        )
        np.testing.assert_allclose(achieved, best, rtol=0, atol=1e-12)


def _keep(x, support):
    out = np.zeros_like(x)
    for i in support:
        out[i] = x[i]
    return out


def test_best_k_block_d1_reduction():
    rng = np.random.default_rng(13)
    for _ in range(10):
        x = rng.standard_normal(12)
        np.testing.assert_array_equal(best_k_block(x, 4, 1), best_k_term(x, 4))


def test_best_k_block_single_block():
    x = np.array([0.0, 0.0, 3.0, 4.0, 0.0, 0.0])
    np.testing.assert_array_equal(best_k_block(x, 1, 2), x)


def test_best_k_block_by_enumeration():
    rng = np.random.default_rng(14)
    for _ in range(20):
        x = rng.standard_normal(8)
        out = best_k_block(x, 2, 2)
        achieved = np.linalg.norm(out - x)
        best = math.inf
        for blocks in itertools.combinations(range(4), 2):
            idx = [b * 2 + j for b in blocks for j in range(2)]
            best = min(best, np.linalg.norm(x - _keep(x, idx)))
        np.testing.assert_allclose(achieved, best, rtol=0, atol=1e-12)


def test_best_k_validation():
    with pytest.raises(ValueError):
        best_k_term(np.ones(3), 4)
    with pytest.raises(ValueError):
        best_k_block(np.ones(6), 1, 4)


# ---------------------------------------------------------------------------
# noise


def test_noise_zero_epsilon_and_none():
    A = generate_matrix("gaussian", 6, 10, seed=0)
    assert not generate_noise(NoiseModel(kind="l2_ball", epsilon=0.0), A).any()
    assert not generate_noise(NoiseModel(kind="none"), A).any()


def test_noise_l2_ball_exact_norm():
    A = generate_matrix("gaussian", 16, 24, seed=1)
    z = generate_noise(NoiseModel(kind="l2_ball", epsilon=0.1, seed=4), A)
    np.testing.assert_allclose(np.linalg.norm(z), 0.1, rtol=0, atol=1e-13)


def test_noise_ds_type_exact_inf_norm():
    A = generate_matrix("gaussian", 16, 24, seed=1)
    z = generate_noise(NoiseModel(kind="ds_type", epsilon=0.1, seed=4), A)
    np.testing.assert_allclose(np.abs(A.entries.T @ z).max(), 0.1, rtol=0, atol=1e-13)


def test_noise_ds_type_l2_variant():
    A = generate_matrix("gaussian", 16, 24, seed=1)
    z = generate_noise(NoiseModel(kind="ds_type", epsilon=0.1, seed=4, ds_norm="l2"), A)
    np.testing.assert_allclose(np.linalg.norm(A.entries.T @ z), 0.1, rtol=0, atol=1e-13)


def test_noise_ds_requires_normalized_matrix():
    from coherence_cs import MeasurementMatrix

    A = MeasurementMatrix(np.eye(3) * 2.0)
    with pytest.raises(NotNormalized):
        generate_noise(NoiseModel(kind="ds_type", epsilon=0.1), A)


def test_noise_determinism():
    A = generate_matrix("gaussian", 8, 12, seed=2)
    model = NoiseModel(kind="l2_ball", epsilon=0.5, seed=11)
    np.testing.assert_array_equal(generate_noise(model, A), generate_noise(model, A))


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(kind="poisson")
    with pytest.raises(ValueError):
        NoiseModel(kind="l2_ball", epsilon=-1.0)
    with pytest.raises(ValueError):
        NoiseModel(kind="ds_type", ds_norm="l1")


# ---------------------------------------------------------------------------
# norms and tails


def test_mixed_norm_cases():
    assert mixed_l21_norm([3.0, 4.0, 0.0, 0.0], 2) == 5.0
    rng = np.random.default_rng(6)
    x = rng.standard_normal(10)
    np.testing.assert_allclose(mixed_l21_norm(x, 1), np.abs(x).sum(), rtol=1e-15)


def test_tail_norms_sparse_vector_is_zero():
    x = np.zeros(20)
    x[[3, 7]] = [1.0, -2.0]
    l1_tail, block_tail = tail_norms(x, 2)
    assert l1_tail == 0.0 and block_tail == 0.0


def test_tail_norms_hand_case():
    l1_tail, _ = tail_norms(np.array([3.0, -1.0, 2.0]), 2)
    assert l1_tail == 1.0


def test_tail_norms_compressible_direct_sum():
    spec = SignalSpec(n=100, structure="compressible", decay_exponent=2.0, seed=8)
    x = generate_signal(spec)
    l1_tail, _ = tail_norms(x, 10)
    expected = sum(i**-2.0 for i in range(11, 101))
    np.testing.assert_allclose(l1_tail, expected, rtol=1e-13)


def test_block_tail_zero_for_block_sparse():
    spec = SignalSpec(n=12, structure="block_sparse", k=2, d=3, seed=1)
    x = generate_signal(spec)
    _, block_tail = tail_norms(x, 2, 3)
    assert block_tail == 0.0


def test_norm_splitting_inequality():
    # ||v||_2 <= ||v_[k]||_2 + ||v||_1 / (2 sqrt(k)) for every v -- the
    # tail-splitting step the error bounds rest on
    rng = np.random.default_rng(15)
    for _ in range(1000):
        n = int(rng.integers(2, 40))
        k = int(rng.integers(1, n + 1))
        v = rng.standard_normal(n) * 10.0 ** rng.integers(-2, 3)
        lhs = np.linalg.norm(v)
        rhs = np.linalg.norm(best_k_term(v, k)) + np.abs(v).sum() / (2.0 * math.sqrt(k))
        assert lhs <= rhs + 1e-10


# ---------------------------------------------------------------------------
# persistence


def test_vector_round_trip(tmp_path):
    rng = np.random.default_rng(16)
    x = rng.standard_normal(17)
    path = tmp_path / "vec.txt"
    save_vector(x, path)
    np.testing.assert_array_equal(load_vector(path), x)


def test_vector_header_mismatch(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3\n1.0\n2.0\n")
    with pytest.raises(ValueError):
        load_vector(path)
