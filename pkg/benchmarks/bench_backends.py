"""Time the compiled kernels against the pure-numpy fallback.

Runs each kernel on a representative workload with both backends and
prints a table: the two are interface-identical, so every call uses the
exact same arguments. Run from the repo root after an editable install:

    python benchmarks/bench_backends.py
"""

import argparse
import time

import numpy as np

from coherence_cs import _kernels_py

try:
    from coherence_cs import _kernels as _compiled
except ImportError:
    _compiled = None


def _lasso_instance(m, n, seed, k=4, noise=0.05):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    A /= np.linalg.norm(A, axis=0)
    x = np.zeros(n)
    x[rng.choice(n, k, replace=False)] = rng.choice([-1.0, 1.0], k)
    b = A @ x + noise * rng.standard_normal(m)
    lip = float(np.linalg.eigvalsh(A.T @ A).max())
    return A, b, lip


def _workloads(seed):
    A1, b1, lip1 = _lasso_instance(256, 512, seed)
    A2, b2, lip2 = _lasso_instance(128, 256, seed + 1)
    A3, b3, _ = _lasso_instance(8, 12, seed + 2)
    M = A3.T @ A3
    c = A3.T @ b3
    rng = np.random.default_rng(seed + 3)
    v = rng.standard_normal(512) * 3.0
    A4, _, _ = _lasso_instance(24, 40, seed + 4)
    G = A4.T @ A4
    off = np.abs(G.copy())
    np.fill_diagonal(off, 0.0)
    mu = float(off.max())
    lo, hi = 1.0 - 2.0 * mu, 1.0 + 2.0 * mu

    def many_prox(mod):
        for _ in range(500):
            mod.prox_sql1(v, 0.3)

    return [
        ("fista_l1 256x512", lambda mod: mod.fista_l1(A1, b1, 0.1, lip1, 1e-9, 100000, 0)),
        ("fista_group 128x256 d=2", lambda mod: mod.fista_group(A2, b2, 2, 0.1, lip2, 1e-9, 100000, 0)),
        ("subgrad_l1 8x12 2e5 steps", lambda mod: mod.subgrad_l1(A3, b3, 0.1, 200000, 0.5, 6250)),
        ("subgrad_group 8x12 2e5 steps", lambda mod: mod.subgrad_group(A3, b3, 2, 0.1, 200000, 0.5, 6250)),
        ("subgrad_ds 12x12 2e5 steps", lambda mod: mod.subgrad_ds(M, c, 0.1, 200000, 0.5, 6250)),
        ("prox_sql1 n=512 x500", many_prox),
        ("quasi_rip_scan 40 cols k=3", lambda mod: mod.quasi_rip_scan(G, 3, lo, hi)),
    ]


def _time(fn, mod, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(mod)
        best = min(best, time.perf_counter() - t0)
    return best * 1e3


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _compiled is None:
        print("compiled extension not built; nothing to compare")
        return

    rows = []
    for name, fn in _workloads(args.seed):
        t_py = _time(fn, _kernels_py, args.repeats)
        t_c = _time(fn, _compiled, args.repeats)
        rows.append((name, t_py, t_c, t_py / t_c))

    w = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{w}}  {'python ms':>10}  {'compiled ms':>11}  {'speedup':>7}")
    print("-" * (w + 34))
    for name, t_py, t_c, sp in rows:
        print(f"{name:<{w}}  {t_py:>10.2f}  {t_c:>11.2f}  {sp:>6.1f}x")


if __name__ == "__main__":
    main()
