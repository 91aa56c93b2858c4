"""Ground-truth signals, noise realizations, and k-term approximations.

Signals come in three structures — exactly k-sparse, compressible
(power-law magnitudes), and block k-sparse — with three magnitude models
(unit, uniform, gaussian). Noise is realized on the boundary of its
constraint set: an l2_ball draw has Euclidean norm exactly epsilon, a
ds_type draw has ||A^T z||_inf exactly epsilon. That is the worst case the
error bounds must absorb.

Reproducibility: every randomized object takes a 64-bit seed, and
``substream_seed`` derives independent child seeds from (seed, branch...)
so experiment trials can be generated in any order, on any number of
threads, with identical results.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProjection, IOFailure, NotNormalized

__all__ = [
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
]

STRUCTURES = ("sparse", "compressible", "block_sparse")
MAGNITUDES = ("unit", "uniform", "gaussian")
NOISE_KINDS = ("l2_ball", "ds_type", "none")


def substream_seed(seed, *branch):
    """Derive a 64-bit child seed from a root seed and an integer path.

    Children with distinct paths are statistically independent streams;
    the derivation is documented stable across platforms.
    """
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(b) for b in branch))
    return int(ss.generate_state(1, np.uint64)[0])


def _rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


@dataclass(frozen=True)
class SignalSpec:
    """Recipe for one ground-truth signal draw.

    structure 'sparse' uses (n, k); 'block_sparse' uses (n, k, d) with k
    counting blocks; 'compressible' ignores k and places magnitudes
    i^(-decay_exponent) at randomly permuted positions. magnitude 'unit'
    puts random signs on magnitude-1 entries, 'uniform' draws magnitudes
    from [lo, hi] with random signs, 'gaussian' draws standard normals.
    """

    n: int
    structure: str = "sparse"
    k: int = 0
    d: int = 1
    decay_exponent: float = 2.0
    magnitude: str = "unit"
    lo: float = 0.5
    hi: float = 1.5
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"signal dimension must be >= 1, got {self.n}")
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure {self.structure!r}")
        if self.magnitude not in MAGNITUDES:
            raise ValueError(f"unknown magnitude model {self.magnitude!r}")
        if self.structure == "sparse" and not 0 <= self.k <= self.n:
            raise ValueError(f"need 0 <= k <= n, got k={self.k}, n={self.n}")
        if self.structure == "block_sparse":
            if self.d < 1 or self.n % self.d != 0:
                raise ValueError(
                    f"block size {self.d} does not divide n = {self.n}"
                )
            if not 0 <= self.k <= self.n // self.d:
                raise ValueError(
                    f"need 0 <= k <= n/d = {self.n // self.d}, got k={self.k}"
                )
        if self.structure == "compressible" and self.decay_exponent <= 0:
            raise ValueError(
                f"decay exponent must be positive, got {self.decay_exponent}"
            )
        if self.magnitude == "uniform" and not 0 < self.lo <= self.hi:
            raise ValueError(f"need 0 < lo <= hi, got lo={self.lo}, hi={self.hi}")


def _draw_magnitudes(rng, count, spec):
    if spec.magnitude == "unit":
        values = np.ones(count)
    elif spec.magnitude == "uniform":
        values = rng.uniform(spec.lo, spec.hi, size=count)
    else:  # gaussian: signed already
        return rng.standard_normal(count)
    signs = rng.choice((-1.0, 1.0), size=count)
    return signs * values


def generate_signal(spec):
    """Draw the signal described by spec. Deterministic in spec.seed."""
    rng = _rng(spec.seed)
    x = np.zeros(spec.n)
    if spec.structure == "sparse":
        if spec.k:
            support = rng.choice(spec.n, size=spec.k, replace=False)
            x[support] = _draw_magnitudes(rng, spec.k, spec)
    elif spec.structure == "block_sparse":
        if spec.k:
            blocks = rng.choice(spec.n // spec.d, size=spec.k, replace=False)
            values = _draw_magnitudes(rng, spec.k * spec.d, spec)
            for pos, blk in enumerate(blocks):
                x[blk * spec.d : (blk + 1) * spec.d] = values[
                    pos * spec.d : (pos + 1) * spec.d
                ]
    else:  # compressible
        magnitudes = np.arange(1, spec.n + 1, dtype=float) ** (-spec.decay_exponent)
        signs = rng.choice((-1.0, 1.0), size=spec.n)
        positions = rng.permutation(spec.n)
        x[positions] = signs * magnitudes
    return x


def best_k_term(x, k):
    """Keep the k largest-magnitude entries, zero the rest.

    Ties break toward the lowest index, so the result is deterministic.
    This is the closest k-sparse vector in Euclidean norm.
    """
    x = np.asarray(x, dtype=float)
    if not 0 <= k <= x.size:
        raise ValueError(f"need 0 <= k <= n = {x.size}, got k={k}")
    if k == 0:
        return np.zeros_like(x)
    if k >= x.size:
        return x.copy()
    order = np.argsort(-np.abs(x), kind="stable")
    out = np.zeros_like(x)
    keep = order[:k]
    out[keep] = x[keep]
    return out


def best_k_block(x, k, d):
    """Keep the k blocks of largest Euclidean norm, zero the rest.

    d must divide the length; ties break toward the lowest block index.
    With d = 1 this is exactly best_k_term.
    """
    x = np.asarray(x, dtype=float)
    if d < 1 or x.size % d != 0:
        raise ValueError(f"block size {d} does not divide n = {x.size}")
    nblocks = x.size // d
    if not 0 <= k <= nblocks:
        raise ValueError(f"need 0 <= k <= n/d = {nblocks}, got k={k}")
    if k == 0:
        return np.zeros_like(x)
    if k >= nblocks:
        return x.copy()
    norms = np.sqrt((x.reshape(nblocks, d) ** 2).sum(axis=1))
    order = np.argsort(-norms, kind="stable")
    out = np.zeros_like(x)
    for blk in order[:k]:
        out[blk * d : (blk + 1) * d] = x[blk * d : (blk + 1) * d]
    return out


@dataclass(frozen=True)
class NoiseModel:
    """Noise recipe: kind in {'l2_ball', 'ds_type', 'none'} plus epsilon.

    ds_norm selects how ds_type noise is normalized: 'inf' (default) makes
    ||A^T z||_inf = epsilon, 'l2' makes ||A^T z||_2 = epsilon (the stricter
    reading; mostly for comparison runs).
    """

    kind: str
    epsilon: float = 0.0
    seed: int = 0
    ds_norm: str = "inf"

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.ds_norm not in ("inf", "l2"):
            raise ValueError(f"ds_norm must be 'inf' or 'l2', got {self.ds_norm!r}")


def generate_noise(model, A):
    """Realize a noise vector for measurement matrix A.

    The draw is Gaussian, then rescaled so the constraint norm equals
    epsilon exactly (worst case on the boundary). Degenerate draws with a
    vanishing normalizer are redrawn up to 10 times before
    DegenerateProjection is raised.
    """
    if model.kind == "none" or model.epsilon == 0.0:
        return np.zeros(A.m)
    if model.kind == "ds_type" and not A.normalized:
        raise NotNormalized("ds_type noise requires a normalized matrix")
    rng = _rng(model.seed)
    for _ in range(10):
        z0 = rng.standard_normal(A.m)
        if model.kind == "l2_ball":
            scale = np.linalg.norm(z0)
        elif model.ds_norm == "inf":
            scale = np.abs(A.entries.T @ z0).max()
        else:
            scale = np.linalg.norm(A.entries.T @ z0)
        if scale >= 1e-14:
            return z0 * (model.epsilon / scale)
    raise DegenerateProjection(
        f"noise normalizer below 1e-14 in 10 consecutive draws ({model.kind})"
    )


def mixed_l21_norm(x, d):
    """Sum of blockwise Euclidean norms; with d = 1 this is the l1 norm."""
    x = np.asarray(x, dtype=float)
    if d < 1 or x.size % d != 0:
        raise ValueError(f"block size {d} does not divide n = {x.size}")
    return float(np.sqrt((x.reshape(-1, d) ** 2).sum(axis=1)).sum())


def tail_norms(x, k, d=1):
    """(l1 norm of the k-term tail, mixed norm of the k-block tail).

    Both are zero exactly when x is k-sparse (resp. block k-sparse); they
    are the signal-complexity terms multiplying C1 and C3 in the bounds.
    """
    x = np.asarray(x, dtype=float)
    l1_tail = float(np.abs(x - best_k_term(x, k)).sum())
    block_tail = mixed_l21_norm(x - best_k_block(x, k, d), d)
    return l1_tail, block_tail


def save_vector(x, path):
    """Write a vector as text: first line n, then one value per line."""
    x = np.asarray(x, dtype=float)
    try:
        with open(path, "w") as fh:
            fh.write(f"{x.size}\n")
            for v in x:
                fh.write(f"{v:.17g}\n")
    except OSError as exc:
        raise IOFailure(path, exc) from exc


def load_vector(path):
    """Read a vector written by save_vector."""
    try:
        with open(path) as fh:
            n = int(fh.readline())
            data = np.loadtxt(fh, dtype=float, ndmin=1)
    except OSError as exc:
        raise IOFailure(path, exc) from exc
    if data.size != n:
        raise ValueError(f"vector body has {data.size} values, header says {n}")
    return data
