"""Pure-numpy implementations of the hot numerical kernels.

This module mirrors the compiled extension ``coherence_cs._kernels`` function
for function; the backend module picks one of the two at import time. Keep
the two in sync — the parity test suite compares them on random inputs.

All kernels are deterministic given their inputs and never touch global
state, so they are safe to call from worker threads.
"""

import itertools

import numpy as np

NAME = "python"


def _soft(v, tau):
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def _kkt_l1(g, x):
    # distance of g from the l1-subdifferential at x:
    # |g_i - sign(x_i)| on the support, max(|g_i| - 1, 0) off it
    on = x != 0.0
    r_on = float(np.abs(g[on] - np.sign(x[on])).max(initial=0.0))
    r_off = float((np.abs(g[~on]) - 1.0).max(initial=0.0))
    return max(r_on, r_off)


def _block_norms(v, d):
    return np.sqrt((v.reshape(-1, d) ** 2).sum(axis=1))


def _block_soft(v, tau, d):
    blocks = v.reshape(-1, d)
    nrm = np.sqrt((blocks * blocks).sum(axis=1))
    scale = np.maximum(1.0 - tau / np.maximum(nrm, 1e-300), 0.0)
    scale[nrm <= 1e-14] = 0.0
    return (blocks * scale[:, None]).reshape(-1)


def _kkt_group(g, x, d):
    gb = g.reshape(-1, d)
    xb = x.reshape(-1, d)
    xn = np.sqrt((xb * xb).sum(axis=1))
    gn = np.sqrt((gb * gb).sum(axis=1))
    on = xn > 0.0
    r_on = 0.0
    if on.any():
        diff = gb[on] - xb[on] / xn[on, None]
        r_on = float(np.sqrt((diff * diff).sum(axis=1)).max())
    r_off = float((gn[~on] - 1.0).max(initial=0.0))
    return max(r_on, r_off)


def fista_l1(A, b, lam, lip, tol, max_iters, history_cap):
    """Accelerated proximal gradient for  min ||x||_1 + ||b - Ax||^2 / (2 lam).

    lip is the largest eigenvalue of A^T A (so the gradient Lipschitz
    constant of the smooth part is lip / lam). A monotone restart keeps the
    objective history non-increasing. Returns
    (x, iterations, kkt_residual, converged, history).
    """
    n = A.shape[1]
    step = lam / lip
    x = np.zeros(n)
    y = x
    r_x = b.astype(float).copy()  # b - A x at the current x
    f_x = 0.5 * float(r_x @ r_x) / lam
    t = 1.0
    hist = []
    kkt = np.inf
    it = 0
    converged = False
    for it in range(1, max_iters + 1):
        r_y = b - A @ y
        z = _soft(y + (step / lam) * (A.T @ r_y), step)
        r_z = b - A @ z
        f_z = float(np.abs(z).sum()) + 0.5 * float(r_z @ r_z) / lam
        if f_z > f_x:
            # accelerated step overshot: redo a plain proximal step from x.
            # That step never increases the objective in exact arithmetic,
            # so take it unconditionally — rejecting it would freeze the
            # iterate once rounding noise dominates.
            z = _soft(x + (step / lam) * (A.T @ r_x), step)
            r_z = b - A @ z
            f_z = float(np.abs(z).sum()) + 0.5 * float(r_z @ r_z) / lam
            t = 1.0
        kkt = _kkt_l1((A.T @ r_z) / lam, z)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = z + ((t - 1.0) / t_next) * (z - x)
        x, r_x, f_x, t = z, r_z, f_z, t_next
        if len(hist) < history_cap:
            hist.append(f_z)
        if kkt <= tol:
            converged = True
            break
    return x, it, float(kkt), converged, np.asarray(hist)


def fista_group(A, b, d, lam, lip, tol, max_iters, history_cap):
    """Same scheme as fista_l1 with the mixed l2/l1 norm and block prox."""
    n = A.shape[1]
    step = lam / lip
    x = np.zeros(n)
    y = x
    r_x = b.astype(float).copy()
    f_x = 0.5 * float(r_x @ r_x) / lam
    t = 1.0
    hist = []
    kkt = np.inf
    it = 0
    converged = False
    for it in range(1, max_iters + 1):
        r_y = b - A @ y
        z = _block_soft(y + (step / lam) * (A.T @ r_y), step, d)
        r_z = b - A @ z
        f_z = float(_block_norms(z, d).sum()) + 0.5 * float(r_z @ r_z) / lam
        if f_z > f_x:
            z = _block_soft(x + (step / lam) * (A.T @ r_x), step, d)
            r_z = b - A @ z
            f_z = float(_block_norms(z, d).sum()) + 0.5 * float(r_z @ r_z) / lam
            t = 1.0
        kkt = _kkt_group((A.T @ r_z) / lam, z, d)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = z + ((t - 1.0) / t_next) * (z - x)
        x, r_x, f_x, t = z, r_z, f_z, t_next
        if len(hist) < history_cap:
            hist.append(f_z)
        if kkt <= tol:
            converged = True
            break
    return x, it, float(kkt), converged, np.asarray(hist)


def subgrad_l1(A, b, lam, steps, step0, halve_every):
    """Normalized subgradient descent on the l1 least-squares objective.

    Uses the minimal-norm subgradient (soft-clipped gradient on the zero
    set), a geometrically halving step, and keeps the best iterate seen.
    Deliberately independent of the proximal solvers: this is the reference
    the solvers are checked against.
    """
    n = A.shape[1]
    x = np.zeros(n)
    r = b.astype(float).copy()
    f_best = 0.5 * float(r @ r) / lam
    x_best = x.copy()
    s = step0
    for k in range(steps):
        u = (A.T @ r) / lam
        g = np.where(x != 0.0, np.sign(x) - u, -_soft(u, 1.0))
        gn = np.sqrt(float(g @ g))
        if gn == 0.0:
            break
        x = x - (s / gn) * g
        r = b - A @ x
        f = float(np.abs(x).sum()) + 0.5 * float(r @ r) / lam
        if f < f_best:
            f_best = f
            x_best = x.copy()
        if (k + 1) % halve_every == 0:
            s *= 0.5
    return f_best, x_best


def subgrad_group(A, b, d, lam, steps, step0, halve_every):
    """Group-norm analogue of subgrad_l1 (block minimal-norm subgradient)."""
    n = A.shape[1]
    x = np.zeros(n)
    r = b.astype(float).copy()
    f_best = 0.5 * float(r @ r) / lam
    x_best = x.copy()
    s = step0
    for k in range(steps):
        u = (A.T @ r) / lam
        xb = x.reshape(-1, d)
        xn = np.sqrt((xb * xb).sum(axis=1))
        on = xn > 0.0
        g = np.empty(n)
        gb = g.reshape(-1, d)
        ub = u.reshape(-1, d)
        gb[on] = xb[on] / xn[on, None] - ub[on]
        # zero blocks: subtract the projection of u onto the unit ball
        gb[~on] = -(_block_soft(ub[~on].reshape(-1), 1.0, d)).reshape(-1, d)
        gn = np.sqrt(float(g @ g))
        if gn == 0.0:
            break
        x = x - (s / gn) * g
        r = b - A @ x
        f = float(_block_norms(x, d).sum()) + 0.5 * float(r @ r) / lam
        if f < f_best:
            f_best = f
            x_best = x.copy()
        if (k + 1) % halve_every == 0:
            s *= 0.5
    return f_best, x_best


def subgrad_ds(M, c, lam, steps, step0, halve_every):
    """Subgradient reference for  min ||x||_1 + ||c - Mx||_inf^2 / (2 lam).

    M is symmetric (a Gram matrix A^T A) and c = A^T b. The smooth-part
    subgradient picks the first index attaining the residual inf-norm.
    """
    n = M.shape[0]
    x = np.zeros(n)
    w = c.astype(float).copy()  # c - M x
    f_best = 0.5 * float(np.abs(w).max() ** 2) / lam if n else 0.0
    x_best = x.copy()
    s = step0
    for k in range(steps):
        j = int(np.argmax(np.abs(w)))
        wmax = w[j]
        v = -(abs(wmax) / lam) * np.sign(wmax) * M[j]
        g = np.where(x != 0.0, np.sign(x) + v, np.sign(v) * np.maximum(np.abs(v) - 1.0, 0.0))
        gn = np.sqrt(float(g @ g))
        if gn == 0.0:
            break
        x = x - (s / gn) * g
        w = c - M @ x
        f = float(np.abs(x).sum()) + 0.5 * float(np.abs(w).max() ** 2) / lam
        if f < f_best:
            f_best = f
            x_best = x.copy()
        if (k + 1) % halve_every == 0:
            s *= 0.5
    return f_best, x_best


def prox_sql1(v, gamma):
    """Proximal map of  gamma/2 * ||.||_1^2  (sort-based, exact).

    Returns (u, selfcheck) where selfcheck is |theta - gamma * ||u||_1| for
    the threshold theta actually used; the fixed-point identity
    u = soft(v, gamma * ||u||_1) characterizes the prox, so selfcheck ~ 0.
    """
    v = np.asarray(v, dtype=float)
    if gamma == 0.0:
        return v.copy(), 0.0
    a = np.abs(v)
    if not a.any():
        return np.zeros_like(v), 0.0
    w = np.sort(a)[::-1]
    cum = np.cumsum(w)
    r = np.arange(1, v.size + 1)
    theta_r = gamma * cum / (1.0 + gamma * r)
    active = w > theta_r
    r_star = int(np.nonzero(active)[0][-1])  # last r with w_r above threshold
    theta = float(theta_r[r_star])
    u = _soft(v, theta)
    selfcheck = abs(theta - gamma * float(np.abs(u).sum()))
    return u, selfcheck


def quasi_rip_scan(G, k, lo, hi, batch=4096):
    """Extreme-eigenvalue scan over all k-column Gram submatrices.

    For each size-k support S, computes the extreme eigenvalues of G[S, S]
    and tracks the worst margins against the band [lo, hi]. Returns
    (worst_lower, worst_upper, support_lower, support_upper, count) where
    worst_lower = min over S of (lambda_min(G_S) - lo) and
    worst_upper = min over S of (hi - lambda_max(G_S)); ties keep the
    lexicographically first support.
    """
    n = G.shape[0]
    combos = itertools.combinations(range(n), k)
    worst_lo = np.inf
    worst_hi = np.inf
    sup_lo = None
    sup_hi = None
    count = 0
    while True:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, batch)),
            dtype=np.intp,
        )
        if flat.size == 0:
            break
        idx = flat.reshape(-1, k)
        sub = G[idx[:, :, None], idx[:, None, :]]
        ev = np.linalg.eigvalsh(sub)
        lo_m = ev[:, 0] - lo
        hi_m = hi - ev[:, -1]
        i = int(np.argmin(lo_m))
        j = int(np.argmin(hi_m))
        if lo_m[i] < worst_lo:
            worst_lo = float(lo_m[i])
            sup_lo = tuple(int(t) for t in idx[i])
        if hi_m[j] < worst_hi:
            worst_hi = float(hi_m[j])
            sup_hi = tuple(int(t) for t in idx[j])
        count += idx.shape[0]
    return worst_lo, worst_hi, sup_lo, sup_hi, count
