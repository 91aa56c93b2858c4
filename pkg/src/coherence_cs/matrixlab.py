"""Measurement matrices: construction, normalization, coherence analysis.

A MeasurementMatrix is a dense m x n array with an optional partition of
its columns into contiguous blocks of width d. The three coherence numbers
(mutual coherence mu, block coherence mu_B, sub-coherence nu) are all
defined on unit-norm columns, so the analysis operations insist on the
``normalized`` flag rather than silently rescaling.

``verify_quasi_rip`` is the brute-force check that every k-column Gram
submatrix has its eigenvalues inside [1-(k-1)mu, 1+(k-1)mu]; it enumerates
all supports (guarded) and reports the worst margins and where they occur.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .bounds import block_condition, eldar_condition, sharp_condition
from .errors import (
    CapUnreachable,
    EnumerationTooLarge,
    IOFailure,
    NotNormalized,
    TooFewBlocks,
    TooFewColumns,
    ZeroColumn,
)

__all__ = [
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
]

ENUMERATION_GUARD = 2_000_000
NORMALIZATION_TOL = 1e-12


@dataclass(eq=False)
class MeasurementMatrix:
    """Dense measurement matrix with an optional block partition.

    entries is copied to a read-only C-contiguous float64 array, so
    instances are immutable and safe to share across threads. d is the
    block width (1 means unstructured); it must divide the column count.
    """

    entries: np.ndarray
    d: int = 1
    normalized: bool = False

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 2:
            raise ValueError(f"entries must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"matrix must be at least 1x1, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("matrix entries must be finite")
        if self.d < 1:
            raise ValueError(f"block size must be >= 1, got {self.d}")
        if arr.shape[1] % self.d != 0:
            raise ValueError(
                f"block size {self.d} does not divide n = {arr.shape[1]}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def m(self):
        return self.entries.shape[0]

    @property
    def n(self):
        return self.entries.shape[1]

    @property
    def l(self):
        """Number of column blocks."""
        return self.n // self.d

    def block(self, i):
        """The i-th m x d column block (a view)."""
        return self.entries[:, i * self.d : (i + 1) * self.d]


@dataclass(frozen=True)
class CoherenceReport:
    """Coherence numbers plus the largest sparsity passing each condition.

    k_sharp is capped at n, k_block / k_eldar at the block count; 0 means
    no k >= 1 qualifies. k_eldar uses the non-strict inequality as usually
    stated; k_eldar_strict is the strict variant.
    """

    mu: float
    mu_block: float
    nu: float
    d: int
    k_sharp: int
    k_block: int
    k_eldar: int
    k_eldar_strict: int


@dataclass(frozen=True)
class QuasiRipReport:
    """Worst eigenvalue margins over all size-k supports.

    worst_lower = min over supports of lambda_min - (1 - (k-1)mu), and
    worst_upper = min of (1 + (k-1)mu) - lambda_max; the coherence bound
    says both are nonnegative. support_lower/upper are the supports where
    the minima occur.
    """

    k: int
    mu: float
    worst_lower: float
    worst_upper: float
    support_lower: tuple
    support_upper: tuple
    supports_checked: int


def _require_normalized(A, op):
    if not A.normalized:
        raise NotNormalized(f"{op} requires unit-norm columns (normalized flag unset)")


def normalize_columns(A):
    """Rescale every column to unit Euclidean norm.

    Raises ZeroColumn if any column norm falls below 1e-14. Block structure
    is preserved; the result carries normalized=True.
    """
    norms = np.linalg.norm(A.entries, axis=0)
    bad = np.nonzero(norms < 1e-14)[0]
    if bad.size:
        raise ZeroColumn(bad[0], norms[bad[0]])
    return MeasurementMatrix(A.entries / norms, d=A.d, normalized=True)


def gram(A):
    """The n x n Gram matrix of the columns."""
    return A.entries.T @ A.entries


def mutual_coherence(A):
    """Largest |inner product| between two distinct columns."""
    _require_normalized(A, "mutual_coherence")
    if A.n < 2:
        raise TooFewColumns(f"mutual coherence needs n >= 2, got n={A.n}")
    G = np.abs(gram(A))
    np.fill_diagonal(G, 0.0)
    return float(G.max())


def _spectral_norm_2x2(B):
    # closed-form largest singular value of a 2x2 block
    a, b = B[0, 0], B[0, 1]
    c, e = B[1, 0], B[1, 1]
    fro2 = a * a + b * b + c * c + e * e
    det = a * e - b * c
    disc = max(fro2 * fro2 - 4.0 * det * det, 0.0)
    return math.sqrt(max((fro2 + math.sqrt(disc)) / 2.0, 0.0))


def spectral_norm(M, tol=1e-12, max_iters=10000):
    """Largest singular value by the power method on M^T M.

    Deterministic: the start vector comes from a fixed RNG stream, and the
    iteration stops on a relative Rayleigh-quotient change below tol.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    v = np.random.default_rng(0x5EED).standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iters):
        w = M.T @ (M @ v)
        lam_new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            lam = lam_new
            break
        lam = lam_new
    return math.sqrt(max(lam, 0.0))


def block_coherence(A):
    """Largest spectral norm of a cross-Gram block (A[i])^T A[j], i != j.

    With d = 1 this is exactly mutual_coherence. Blocks of width <= 2 use
    closed-form singular values; wider blocks use the power method.
    """
    _require_normalized(A, "block_coherence")
    if A.l < 2:
        raise TooFewBlocks(f"block coherence needs l >= 2 blocks, got l={A.l}")
    if A.d == 1:
        return mutual_coherence(A)
    d = A.d
    G = gram(A)
    best = 0.0
    for i in range(A.l):
        for j in range(i + 1, A.l):
            B = G[i * d : (i + 1) * d, j * d : (j + 1) * d]
            if d == 2:
                s = _spectral_norm_2x2(B)
            else:
                s = spectral_norm(B)
            if s > best:
                best = s
    return best


def sub_coherence(A):
    """Largest within-block mutual coherence; 0 when d = 1 (no pairs)."""
    _require_normalized(A, "sub_coherence")
    if A.d == 1:
        return 0.0
    best = 0.0
    for i in range(A.l):
        B = A.block(i)
        Gi = np.abs(B.T @ B)
        np.fill_diagonal(Gi, 0.0)
        best = max(best, float(Gi.max()))
    return best


def _largest_k(pred, cap):
    k = 0
    while k < cap and pred(k + 1):
        k += 1
    return k


def coherence_report(A):
    """Coherence numbers and the largest k passing each recovery condition."""
    _require_normalized(A, "coherence_report")
    mu = mutual_coherence(A)
    if A.d == 1:
        mu_block = mu
        nu = 0.0
    else:
        mu_block = block_coherence(A)
        nu = sub_coherence(A)
    d = A.d
    k_sharp = _largest_k(lambda k: sharp_condition(k, mu), A.n)
    k_block = _largest_k(lambda k: block_condition(k, d, mu_block), A.l)
    k_eldar = _largest_k(lambda k: eldar_condition(k, d, mu_block, nu), A.l)
    k_eldar_strict = _largest_k(
        lambda k: mu_block < (1.0 - (d - 1) * nu) / ((2 * k - 1) * d), A.l
    )
    return CoherenceReport(
        mu=mu,
        mu_block=mu_block,
        nu=nu,
        d=d,
        k_sharp=k_sharp,
        k_block=k_block,
        k_eldar=k_eldar,
        k_eldar_strict=k_eldar_strict,
    )


def verify_quasi_rip(A, k):
    """Brute-force check of the coherence eigenvalue sandwich at sparsity k.

    Enumerates every size-k support S, takes the extreme eigenvalues of the
    k x k Gram submatrix, and reports the worst margins against the band
    [1 - (k-1)mu, 1 + (k-1)mu]. Margins below -1e-10 would falsify the
    bound. Guarded: raises EnumerationTooLarge when C(n,k) > 2e6.
    """
    _require_normalized(A, "verify_quasi_rip")
    if not 1 <= k <= A.n:
        raise ValueError(f"need 1 <= k <= n = {A.n}, got k={k}")
    count = math.comb(A.n, k)
    if count > ENUMERATION_GUARD:
        raise EnumerationTooLarge(A.n, k, count, ENUMERATION_GUARD)
    mu = mutual_coherence(A) if A.n >= 2 else 0.0
    lo = 1.0 - (k - 1) * mu
    hi = 1.0 + (k - 1) * mu
    G = gram(A)
    worst_lo, worst_hi, sup_lo, sup_hi, checked = backend.quasi_rip_scan(G, k, lo, hi)
    return QuasiRipReport(
        k=k,
        mu=mu,
        worst_lower=float(worst_lo),
        worst_upper=float(worst_hi),
        support_lower=tuple(sup_lo),
        support_upper=tuple(sup_hi),
        supports_checked=int(checked),
    )


def generate_matrix(kind, m, n, d=1, seed=0, coherence_cap=None, max_attempts=50):
    """Draw a normalized random measurement matrix, optionally under a cap.

    kind 'gaussian': i.i.d. standard normal entries, columns normalized.
    kind 'block_orthonormal': each m x d block is the Q factor of a Gaussian
    draw, so blocks are orthonormal (sub-coherence 0) and columns unit-norm.

    With coherence_cap set, redraws with fresh sub-seeds until the mutual
    coherence (gaussian) or block coherence (block_orthonormal) is below the
    cap, up to max_attempts; raises CapUnreachable reporting the best value
    achieved otherwise. Attempt a uses the child stream (seed, a), so the
    accepted matrix is reproducible from (kind, dims, seed) alone.
    """
    if kind not in ("gaussian", "block_orthonormal"):
        raise ValueError(f"unknown matrix kind {kind!r}")
    if m < 1 or n < 1 or d < 1 or n % d != 0:
        raise ValueError(f"bad dimensions (m={m}, n={n}, d={d})")
    if kind == "block_orthonormal" and m < d:
        raise ValueError(f"block_orthonormal needs m >= d, got m={m} < d={d}")
    if max_attempts < 1:
        raise ValueError(f"max_attempts must be >= 1, got {max_attempts}")
    best = math.inf
    for attempt in range(max_attempts):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(attempt,)))
        )
        if kind == "gaussian":
            raw = rng.standard_normal((m, n))
        else:
            raw = np.empty((m, n))
            for i in range(n // d):
                q, _ = np.linalg.qr(rng.standard_normal((m, d)))
                raw[:, i * d : (i + 1) * d] = q
        A = normalize_columns(MeasurementMatrix(raw, d=d))
        if coherence_cap is None:
            return A
        value = block_coherence(A) if kind == "block_orthonormal" else mutual_coherence(A)
        if value < coherence_cap:
            return A
        best = min(best, value)
    raise CapUnreachable(max_attempts, best, coherence_cap)


def save_matrix(A, path):
    """Write the matrix as text: header 'm n d', then one row per line.

    Values carry 17 significant digits, enough to round-trip float64
    exactly.
    """
    try:
        with open(path, "w") as fh:
            fh.write(f"{A.m} {A.n} {A.d}\n")
            for row in A.entries:
                fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
    except OSError as exc:
        raise IOFailure(path, exc) from exc


def load_matrix(path):
    """Read a matrix written by save_matrix.

    The normalized flag is recomputed from the loaded column norms (the
    format does not carry it).
    """
    try:
        with open(path) as fh:
            header = fh.readline().split()
            if len(header) != 3:
                raise ValueError(f"bad matrix header: {header!r}")
            m, n, d = (int(t) for t in header)
            data = np.loadtxt(fh, dtype=float, ndmin=2)
    except OSError as exc:
        raise IOFailure(path, exc) from exc
    if data.shape != (m, n):
        raise ValueError(f"matrix body {data.shape} does not match header ({m}, {n})")
    norms = np.linalg.norm(data, axis=0)
    normalized = bool(np.all(np.abs(norms - 1.0) <= NORMALIZATION_TOL))
    return MeasurementMatrix(data, d=d, normalized=normalized)
