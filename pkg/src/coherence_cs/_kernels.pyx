# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernels_py``.

Function-for-function mirror of the pure-numpy backend: same argument
order, same return values, same tie-breaking. The parity suite compares
the two on random inputs, so any behavioural drift here is a bug.

The dense products go through the same BLAS paths numpy uses (dgemv on
the row-major storage with the transpose flag swapped), which keeps the
iterate trajectories bitwise-aligned between the backends; the remaining
scalar work is plain C loops.
"""

import numpy as np

from libc.math cimport INFINITY, fabs, sqrt
from libc.stdlib cimport qsort
from scipy.linalg.cython_blas cimport ddot, dgemv
from scipy.linalg.cython_lapack cimport dsyev

NAME = "compiled"


# ---------------------------------------------------------------------------
# small C helpers


cdef inline double _max2(double a, double b) noexcept nogil:
    return a if a > b else b


cdef void _mv(const double* a, int m, int n, const double* v, double* out) noexcept nogil:
    # out = A @ v for row-major A of shape (m, n): the memory is an (n, m)
    # Fortran matrix equal to A^T, so this is dgemv with trans="T".
    cdef int bm = n, bn = m, inc = 1
    cdef double one = 1.0, zero = 0.0
    dgemv("T", &bm, &bn, &one, <double*> a, &bm, <double*> v, &inc, &zero, out, &inc)


cdef void _rmv(const double* a, int m, int n, const double* r, double* out) noexcept nogil:
    # out = A.T @ r, same layout trick with trans="N"
    cdef int bm = n, bn = m, inc = 1
    cdef double one = 1.0, zero = 0.0
    dgemv("N", &bm, &bn, &one, <double*> a, &bm, <double*> r, &inc, &zero, out, &inc)


cdef double _dot(int n, const double* x, const double* y) noexcept nogil:
    cdef int inc = 1
    return ddot(&n, <double*> x, &inc, <double*> y, &inc)


cdef double _suml1(int n, const double* v) noexcept nogil:
    cdef double s = 0.0
    cdef int i
    for i in range(n):
        s += fabs(v[i])
    return s


cdef inline double _soft1(double w, double tau) noexcept nogil:
    cdef double a = fabs(w) - tau
    if a <= 0.0:
        return 0.0
    return a if w > 0.0 else -a


cdef double _kkt_l1_c(int n, const double* g, const double* x) noexcept nogil:
    cdef double r_on = 0.0, r_off = 0.0, v
    cdef int i
    for i in range(n):
        if x[i] != 0.0:
            v = fabs(g[i] - (1.0 if x[i] > 0.0 else -1.0))
            if v > r_on:
                r_on = v
        else:
            v = fabs(g[i]) - 1.0
            if v > r_off:
                r_off = v
    return _max2(r_on, r_off)


cdef void _block_soft_c(int n, int d, const double* w, double tau, double* out) noexcept nogil:
    cdef int nb = n / d, i, j, base
    cdef double ssq, nrm, scale
    for i in range(nb):
        base = i * d
        ssq = 0.0
        for j in range(d):
            ssq += w[base + j] * w[base + j]
        nrm = sqrt(ssq)
        if nrm <= 1e-14:
            scale = 0.0
        else:
            scale = 1.0 - tau / _max2(nrm, 1e-300)
            if scale < 0.0:
                scale = 0.0
        for j in range(d):
            out[base + j] = w[base + j] * scale


cdef double _sum_block_norms(int n, int d, const double* v) noexcept nogil:
    cdef int nb = n / d, i, j, base
    cdef double s = 0.0, ssq
    for i in range(nb):
        base = i * d
        ssq = 0.0
        for j in range(d):
            ssq += v[base + j] * v[base + j]
        s += sqrt(ssq)
    return s


cdef double _kkt_group_c(int n, int d, const double* g, const double* x) noexcept nogil:
    cdef int nb = n / d, i, j, base
    cdef double r_on = 0.0, r_off = 0.0, ssq, xn, t
    for i in range(nb):
        base = i * d
        ssq = 0.0
        for j in range(d):
            ssq += x[base + j] * x[base + j]
        xn = sqrt(ssq)
        ssq = 0.0
        if xn > 0.0:
            for j in range(d):
                t = g[base + j] - x[base + j] / xn
                ssq += t * t
            t = sqrt(ssq)
            if t > r_on:
                r_on = t
        else:
            for j in range(d):
                ssq += g[base + j] * g[base + j]
            t = sqrt(ssq) - 1.0
            if t > r_off:
                r_off = t
    return _max2(r_on, r_off)


# ---------------------------------------------------------------------------
# accelerated proximal solvers


def fista_l1(A, b, double lam, double lip, double tol, long max_iters, long history_cap):
    """Accelerated proximal gradient for  min ||x||_1 + ||b - Ax||^2 / (2 lam).

    Same scheme and same monotone restart as the numpy twin. Returns
    (x, iterations, kkt_residual, converged, history).
    """
    cdef const double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef int m = Av.shape[0]
    cdef int n = Av.shape[1]
    cdef double step = lam / lip
    cdef double c = step / lam

    x_arr = np.zeros(n)
    y_arr = np.zeros(n)
    z_arr = np.zeros(n)
    u_arr = np.empty(n)
    rx_arr = np.array(bv, dtype=np.float64)
    rz_arr = np.empty(m)
    tmp_arr = np.empty(m)
    cdef long hcap = history_cap if history_cap > 0 else 0
    if hcap > max_iters:
        hcap = max_iters
    hist_arr = np.empty(hcap)
    cdef double[::1] x = x_arr, y = y_arr, z = z_arr, u = u_arr
    cdef double[::1] r_x = rx_arr, r_z = rz_arr, tmp = tmp_arr, hist = hist_arr
    cdef const double* ap = &Av[0, 0]

    cdef double f_x = 0.5 * _dot(m, &r_x[0], &r_x[0]) / lam
    cdef double f_z, kkt = INFINITY, t = 1.0, t_next
    cdef long it = 0, hcount = 0
    cdef int i
    cdef bint converged = False

    for it in range(1, max_iters + 1):
        _mv(ap, m, n, &y[0], &tmp[0])
        for i in range(m):
            tmp[i] = bv[i] - tmp[i]        # b - A y
        _rmv(ap, m, n, &tmp[0], &u[0])
        for i in range(n):
            z[i] = _soft1(y[i] + c * u[i], step)
        _mv(ap, m, n, &z[0], &tmp[0])
        for i in range(m):
            r_z[i] = bv[i] - tmp[i]
        f_z = _suml1(n, &z[0]) + 0.5 * _dot(m, &r_z[0], &r_z[0]) / lam
        if f_z > f_x:
            # accelerated step overshot: redo a plain proximal step from x
            # (never increases the objective in exact arithmetic)
            _rmv(ap, m, n, &r_x[0], &u[0])
            for i in range(n):
                z[i] = _soft1(x[i] + c * u[i], step)
            _mv(ap, m, n, &z[0], &tmp[0])
            for i in range(m):
                r_z[i] = bv[i] - tmp[i]
            f_z = _suml1(n, &z[0]) + 0.5 * _dot(m, &r_z[0], &r_z[0]) / lam
            t = 1.0
        _rmv(ap, m, n, &r_z[0], &u[0])
        for i in range(n):
            u[i] /= lam
        kkt = _kkt_l1_c(n, &u[0], &z[0])
        t_next = 0.5 * (1.0 + sqrt(1.0 + 4.0 * t * t))
        for i in range(n):
            y[i] = z[i] + ((t - 1.0) / t_next) * (z[i] - x[i])
            x[i] = z[i]
        for i in range(m):
            r_x[i] = r_z[i]
        f_x = f_z
        t = t_next
        if hcount < hcap:
            hist[hcount] = f_z
            hcount += 1
        if kkt <= tol:
            converged = True
            break
    return x_arr, it, float(kkt), converged, hist_arr[:hcount]


def fista_group(A, b, long d, double lam, double lip, double tol, long max_iters, long history_cap):
    """Same scheme as fista_l1 with the mixed l2/l1 norm and block prox."""
    cdef const double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef int m = Av.shape[0]
    cdef int n = Av.shape[1]
    cdef int dd = <int> d
    cdef double step = lam / lip
    cdef double c = step / lam

    x_arr = np.zeros(n)
    y_arr = np.zeros(n)
    z_arr = np.zeros(n)
    u_arr = np.empty(n)
    w_arr = np.empty(n)
    rx_arr = np.array(bv, dtype=np.float64)
    rz_arr = np.empty(m)
    tmp_arr = np.empty(m)
    cdef long hcap = history_cap if history_cap > 0 else 0
    if hcap > max_iters:
        hcap = max_iters
    hist_arr = np.empty(hcap)
    cdef double[::1] x = x_arr, y = y_arr, z = z_arr, u = u_arr, w = w_arr
    cdef double[::1] r_x = rx_arr, r_z = rz_arr, tmp = tmp_arr, hist = hist_arr
    cdef const double* ap = &Av[0, 0]

    cdef double f_x = 0.5 * _dot(m, &r_x[0], &r_x[0]) / lam
    cdef double f_z, kkt = INFINITY, t = 1.0, t_next
    cdef long it = 0, hcount = 0
    cdef int i
    cdef bint converged = False

    for it in range(1, max_iters + 1):
        _mv(ap, m, n, &y[0], &tmp[0])
        for i in range(m):
            tmp[i] = bv[i] - tmp[i]
        _rmv(ap, m, n, &tmp[0], &u[0])
        for i in range(n):
            w[i] = y[i] + c * u[i]
        _block_soft_c(n, dd, &w[0], step, &z[0])
        _mv(ap, m, n, &z[0], &tmp[0])
        for i in range(m):
            r_z[i] = bv[i] - tmp[i]
        f_z = _sum_block_norms(n, dd, &z[0]) + 0.5 * _dot(m, &r_z[0], &r_z[0]) / lam
        if f_z > f_x:
            _rmv(ap, m, n, &r_x[0], &u[0])
            for i in range(n):
                w[i] = x[i] + c * u[i]
            _block_soft_c(n, dd, &w[0], step, &z[0])
            _mv(ap, m, n, &z[0], &tmp[0])
            for i in range(m):
                r_z[i] = bv[i] - tmp[i]
            f_z = _sum_block_norms(n, dd, &z[0]) + 0.5 * _dot(m, &r_z[0], &r_z[0]) / lam
            t = 1.0
        _rmv(ap, m, n, &r_z[0], &u[0])
        for i in range(n):
            u[i] /= lam
        kkt = _kkt_group_c(n, dd, &u[0], &z[0])
        t_next = 0.5 * (1.0 + sqrt(1.0 + 4.0 * t * t))
        for i in range(n):
            y[i] = z[i] + ((t - 1.0) / t_next) * (z[i] - x[i])
            x[i] = z[i]
        for i in range(m):
            r_x[i] = r_z[i]
        f_x = f_z
        t = t_next
        if hcount < hcap:
            hist[hcount] = f_z
            hcount += 1
        if kkt <= tol:
            converged = True
            break
    return x_arr, it, float(kkt), converged, hist_arr[:hcount]


# ---------------------------------------------------------------------------
# subgradient references


def subgrad_l1(A, b, double lam, long steps, double step0, long halve_every):
    """Normalized subgradient descent on the l1 least-squares objective."""
    cdef const double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef int m = Av.shape[0]
    cdef int n = Av.shape[1]

    x_arr = np.zeros(n)
    best_arr = np.zeros(n)
    g_arr = np.empty(n)
    u_arr = np.empty(n)
    r_arr = np.array(bv, dtype=np.float64)
    tmp_arr = np.empty(m)
    cdef double[::1] x = x_arr, x_best = best_arr, g = g_arr, u = u_arr
    cdef double[::1] r = r_arr, tmp = tmp_arr
    cdef const double* ap = &Av[0, 0]

    cdef double f_best = 0.5 * _dot(m, &r[0], &r[0]) / lam
    cdef double s = step0, gn, sg, f, au
    cdef long k
    cdef int i

    for k in range(steps):
        _rmv(ap, m, n, &r[0], &u[0])
        for i in range(n):
            u[i] /= lam
        for i in range(n):
            if x[i] != 0.0:
                g[i] = (1.0 if x[i] > 0.0 else -1.0) - u[i]
            else:
                au = fabs(u[i]) - 1.0
                if au <= 0.0:
                    g[i] = 0.0
                else:
                    g[i] = -au if u[i] > 0.0 else au
        gn = sqrt(_dot(n, &g[0], &g[0]))
        if gn == 0.0:
            break
        sg = s / gn
        for i in range(n):
            x[i] = x[i] - sg * g[i]
        _mv(ap, m, n, &x[0], &tmp[0])
        for i in range(m):
            r[i] = bv[i] - tmp[i]
        f = _suml1(n, &x[0]) + 0.5 * _dot(m, &r[0], &r[0]) / lam
        if f < f_best:
            f_best = f
            for i in range(n):
                x_best[i] = x[i]
        if (k + 1) % halve_every == 0:
            s *= 0.5
    return f_best, best_arr


def subgrad_group(A, b, long d, double lam, long steps, double step0, long halve_every):
    """Group-norm analogue of subgrad_l1 (block minimal-norm subgradient)."""
    cdef const double[:, ::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef int m = Av.shape[0]
    cdef int n = Av.shape[1]
    cdef int dd = <int> d
    cdef int nb = n / dd

    x_arr = np.zeros(n)
    best_arr = np.zeros(n)
    g_arr = np.empty(n)
    u_arr = np.empty(n)
    r_arr = np.array(bv, dtype=np.float64)
    tmp_arr = np.empty(m)
    cdef double[::1] x = x_arr, x_best = best_arr, g = g_arr, u = u_arr
    cdef double[::1] r = r_arr, tmp = tmp_arr
    cdef const double* ap = &Av[0, 0]

    cdef double f_best = 0.5 * _dot(m, &r[0], &r[0]) / lam
    cdef double s = step0, gn, sg, f, ssq, xn, scale
    cdef long k
    cdef int i, j, base

    for k in range(steps):
        _rmv(ap, m, n, &r[0], &u[0])
        for i in range(n):
            u[i] /= lam
        for i in range(nb):
            base = i * dd
            ssq = 0.0
            for j in range(dd):
                ssq += x[base + j] * x[base + j]
            xn = sqrt(ssq)
            if xn > 0.0:
                for j in range(dd):
                    g[base + j] = x[base + j] / xn - u[base + j]
            else:
                # zero block: subtract the projection of u onto the unit ball
                ssq = 0.0
                for j in range(dd):
                    ssq += u[base + j] * u[base + j]
                xn = sqrt(ssq)
                if xn <= 1e-14:
                    scale = 0.0
                else:
                    scale = 1.0 - 1.0 / _max2(xn, 1e-300)
                    if scale < 0.0:
                        scale = 0.0
                for j in range(dd):
                    g[base + j] = -(u[base + j] * scale)
        gn = sqrt(_dot(n, &g[0], &g[0]))
        if gn == 0.0:
            break
        sg = s / gn
        for i in range(n):
            x[i] = x[i] - sg * g[i]
        _mv(ap, m, n, &x[0], &tmp[0])
        for i in range(m):
            r[i] = bv[i] - tmp[i]
        f = _sum_block_norms(n, dd, &x[0]) + 0.5 * _dot(m, &r[0], &r[0]) / lam
        if f < f_best:
            f_best = f
            for i in range(n):
                x_best[i] = x[i]
        if (k + 1) % halve_every == 0:
            s *= 0.5
    return f_best, best_arr


def subgrad_ds(M, c, double lam, long steps, double step0, long halve_every):
    """Subgradient reference for  min ||x||_1 + ||c - Mx||_inf^2 / (2 lam)."""
    cdef const double[:, ::1] Mv = np.ascontiguousarray(M, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef int n = Mv.shape[0]

    x_arr = np.zeros(n)
    best_arr = np.zeros(n)
    g_arr = np.empty(n)
    v_arr = np.empty(n)
    w_arr = np.array(cv, dtype=np.float64)
    tmp_arr = np.empty(n)
    cdef double[::1] x = x_arr, x_best = best_arr, g = g_arr, v = v_arr
    cdef double[::1] w = w_arr, tmp = tmp_arr
    cdef const double* mp = &Mv[0, 0] if n else NULL

    cdef double f_best = 0.0, wmax, aw, coef, gn, sg, f, av
    cdef long k
    cdef int i, j
    if n:
        wmax = 0.0
        for i in range(n):
            aw = fabs(w[i])
            if aw > wmax:
                wmax = aw
        f_best = 0.5 * wmax * wmax / lam
    cdef double s = step0

    for k in range(steps):
        j = 0
        aw = fabs(w[0])
        for i in range(1, n):
            if fabs(w[i]) > aw:
                aw = fabs(w[i])
                j = i
        wmax = w[j]
        coef = -(fabs(wmax) / lam) * (1.0 if wmax > 0.0 else (-1.0 if wmax < 0.0 else 0.0))
        for i in range(n):
            v[i] = coef * Mv[j, i]
        for i in range(n):
            if x[i] != 0.0:
                g[i] = (1.0 if x[i] > 0.0 else -1.0) + v[i]
            else:
                av = fabs(v[i]) - 1.0
                if av <= 0.0:
                    g[i] = 0.0
                else:
                    g[i] = av if v[i] > 0.0 else -av
        gn = sqrt(_dot(n, &g[0], &g[0]))
        if gn == 0.0:
            break
        sg = s / gn
        for i in range(n):
            x[i] = x[i] - sg * g[i]
        _mv(mp, n, n, &x[0], &tmp[0])
        wmax = 0.0
        for i in range(n):
            w[i] = cv[i] - tmp[i]
            aw = fabs(w[i])
            if aw > wmax:
                wmax = aw
        f = _suml1(n, &x[0]) + 0.5 * wmax * wmax / lam
        if f < f_best:
            f_best = f
            for i in range(n):
                x_best[i] = x[i]
        if (k + 1) % halve_every == 0:
            s *= 0.5
    return f_best, best_arr


# ---------------------------------------------------------------------------
# proximal map of the squared l1 norm


cdef int _cmp_desc(const void* pa, const void* pb) noexcept nogil:
    cdef double a = (<const double*> pa)[0]
    cdef double b = (<const double*> pb)[0]
    if a < b:
        return 1
    if a > b:
        return -1
    return 0


def prox_sql1(v, double gamma):
    """Proximal map of  gamma/2 * ||.||_1^2  (sort-based, exact).

    Returns (u, selfcheck), selfcheck being |theta - gamma * ||u||_1| for
    the threshold actually used.
    """
    v_arr = np.ascontiguousarray(v, dtype=np.float64)
    if gamma == 0.0:
        return v_arr.copy(), 0.0
    cdef const double[::1] vv = v_arr
    cdef int n = vv.shape[0]
    cdef int i
    cdef bint any_nonzero = False
    for i in range(n):
        if vv[i] != 0.0:
            any_nonzero = True
            break
    if not any_nonzero:
        return np.zeros(n), 0.0

    w_arr = np.empty(n)
    u_arr = np.empty(n)
    cdef double[::1] w = w_arr, u = u_arr
    for i in range(n):
        w[i] = fabs(vv[i])
    qsort(&w[0], n, sizeof(double), _cmp_desc)
    cdef double cum = 0.0, theta = 0.0, theta_i
    for i in range(n):
        cum += w[i]
        theta_i = gamma * cum / (1.0 + gamma * (i + 1))
        if w[i] > theta_i:
            theta = theta_i       # last rank whose entry clears the threshold
    for i in range(n):
        u[i] = _soft1(vv[i], theta)
    cdef double selfcheck = fabs(theta - gamma * _suml1(n, &u[0]))
    return u_arr, selfcheck


# ---------------------------------------------------------------------------
# exhaustive eigenvalue scan


def quasi_rip_scan(G, long k, double lo, double hi, long batch=4096):
    """Extreme-eigenvalue scan over all k-column Gram submatrices.

    Same contract as the numpy twin: returns (worst_lower, worst_upper,
    support_lower, support_upper, count), ties keeping the
    lexicographically first support. ``batch`` is accepted for interface
    parity; the scan here is streaming.
    """
    cdef const double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef int n = Gv.shape[0]
    cdef int kk = <int> k
    if kk <= 0 or kk > n:
        return INFINITY, INFINITY, None, None, 0

    idx_arr = np.empty(kk, dtype=np.intp)
    slo_arr = np.empty(kk, dtype=np.intp)
    shi_arr = np.empty(kk, dtype=np.intp)
    sub_arr = np.empty(kk * kk)
    w_arr = np.empty(kk)
    cdef int lwork = 3 * kk + 64
    work_arr = np.empty(lwork)
    cdef Py_ssize_t[::1] idx = idx_arr, slo = slo_arr, shi = shi_arr
    cdef double[::1] sub = sub_arr, w = w_arr, work = work_arr

    cdef double worst_lo = INFINITY, worst_hi = INFINITY, lo_m, hi_m
    cdef long count = 0
    cdef int i, j, p, info
    for i in range(kk):
        idx[i] = i

    while True:
        for j in range(kk):
            for i in range(kk):
                sub[i + kk * j] = Gv[idx[i], idx[j]]
        dsyev("N", "L", &kk, &sub[0], &kk, &w[0], &work[0], &lwork, &info)
        if info != 0:
            raise RuntimeError(f"eigenvalue scan failed (dsyev info={info})")
        lo_m = w[0] - lo
        hi_m = hi - w[kk - 1]
        if lo_m < worst_lo:
            worst_lo = lo_m
            for i in range(kk):
                slo[i] = idx[i]
        if hi_m < worst_hi:
            worst_hi = hi_m
            for i in range(kk):
                shi[i] = idx[i]
        count += 1
        p = kk - 1
        while p >= 0 and idx[p] == n - kk + p:
            p -= 1
        if p < 0:
            break
        idx[p] += 1
        for i in range(p + 1, kk):
            idx[i] = idx[i - 1] + 1
    return (
        float(worst_lo),
        float(worst_hi),
        tuple(int(t) for t in slo_arr),
        tuple(int(t) for t in shi_arr),
        count,
    )
