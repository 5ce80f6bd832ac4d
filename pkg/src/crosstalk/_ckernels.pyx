# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the _pykernels functions.

Householder QR on small dense systems and the regularized incomplete
beta function. Contracts match crosstalk._pykernels exactly; that module
is the reference implementation.
"""

from libc.math cimport exp, fabs, lgamma, log, log1p, sqrt

import numpy as np

DEF FPMIN = 1e-300
DEF CF_EPS = 3e-16
DEF CF_MAX_ITER = 400


cdef int _householder(double[::1, :] A, double[::1] u, double[::1] rdiag,
                      Py_ssize_t n, Py_ssize_t p) nogil:
    """In-place QR of A with y rotated alongside.

    On return the upper triangle of A holds R, u holds Q'y extended by
    the residual tail, and rdiag the diagonal of R. Columns below the
    diagonal are scratch (they keep the reflector tails).
    """
    cdef Py_ssize_t i, j, k
    cdef double s, normx, x0, alpha, v0, vtv, coef, dot, t
    for j in range(p):
        s = 0.0
        for i in range(j, n):
            s += A[i, j] * A[i, j]
        normx = sqrt(s)
        if normx == 0.0:
            rdiag[j] = 0.0
            continue
        x0 = A[j, j]
        alpha = -normx if x0 >= 0.0 else normx
        v0 = x0 - alpha
        vtv = v0 * v0 + (s - x0 * x0)
        rdiag[j] = alpha
        A[j, j] = alpha
        if vtv == 0.0:
            continue
        coef = 2.0 / vtv
        for k in range(j + 1, p):
            dot = v0 * A[j, k]
            for i in range(j + 1, n):
                dot += A[i, j] * A[i, k]
            t = coef * dot
            A[j, k] -= t * v0
            for i in range(j + 1, n):
                A[i, k] -= t * A[i, j]
        dot = v0 * u[j]
        for i in range(j + 1, n):
            dot += A[i, j] * u[i]
        t = coef * dot
        u[j] -= t * v0
        for i in range(j + 1, n):
            u[i] -= t * A[i, j]
    return 0


def prefix_rss(X, y):
    """See crosstalk._pykernels.prefix_rss."""
    cdef double[::1, :] A = np.array(X, dtype=np.float64, order="F", copy=True)
    cdef double[::1] u = np.array(y, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t p = A.shape[1]
    if u.shape[0] != n:
        raise ValueError("X and y row counts differ")
    if n < p:
        raise ValueError(f"need n >= p, got n={n}, p={p}")
    rss_arr = np.empty(p + 1, dtype=np.float64)
    rdiag_arr = np.empty(p, dtype=np.float64)
    cdef double[::1] rss = rss_arr
    cdef double[::1] rdiag = rdiag_arr
    cdef Py_ssize_t i
    cdef double acc = 0.0
    if p > 0:
        with nogil:
            _householder(A, u, rdiag, n, p)
            for i in range(n - 1, p - 1, -1):
                acc += u[i] * u[i]
            rss[p] = acc
            for i in range(p - 1, -1, -1):
                acc += u[i] * u[i]
                rss[i] = acc
    else:
        for i in range(n):
            acc += u[i] * u[i]
        rss_arr[0] = acc
    return rss_arr, rdiag_arr


def ols_fit(X, y):
    """See crosstalk._pykernels.ols_fit."""
    cdef double[::1, :] A = np.array(X, dtype=np.float64, order="F", copy=True)
    cdef double[::1] u = np.array(y, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t p = A.shape[1]
    if u.shape[0] != n:
        raise ValueError("X and y row counts differ")
    if n < p or p == 0:
        raise ValueError(f"need n >= p >= 1, got n={n}, p={p}")
    rdiag_arr = np.empty(p, dtype=np.float64)
    cdef double[::1] rdiag = rdiag_arr
    cdef double rss = 0.0
    cdef Py_ssize_t i, j, k
    with nogil:
        _householder(A, u, rdiag, n, p)
        for i in range(p, n):
            rss += u[i] * u[i]
    cdef double rmax = 0.0
    for i in range(p):
        if fabs(rdiag[i]) > rmax:
            rmax = fabs(rdiag[i])
    if rmax < 1.0:
        rmax = 1.0
    for i in range(p):
        if fabs(rdiag[i]) < 1e-12 * rmax:
            return (np.full(p, np.nan), float(rss), np.full(p, np.inf), rdiag_arr)
    beta_arr = np.empty(p, dtype=np.float64)
    winv_arr = np.zeros((p, p), dtype=np.float64, order="F")
    diag_arr = np.empty(p, dtype=np.float64)
    cdef double[::1] beta = beta_arr
    cdef double[::1, :] W = winv_arr
    cdef double[::1] diag_inv = diag_arr
    cdef double acc
    with nogil:
        # back-substitution: R beta = u[:p]
        for i in range(p - 1, -1, -1):
            acc = u[i]
            for j in range(i + 1, p):
                acc -= A[i, j] * beta[j]
            beta[i] = acc / A[i, i]
        # W = R^-1 (upper triangular), column by column
        for k in range(p):
            W[k, k] = 1.0 / A[k, k]
            for i in range(k - 1, -1, -1):
                acc = 0.0
                for j in range(i + 1, k + 1):
                    acc -= A[i, j] * W[j, k]
                W[i, k] = acc / A[i, i]
        for i in range(p):
            acc = 0.0
            for j in range(i, p):
                acc += W[i, j] * W[i, j]
            diag_inv[i] = acc
    return beta_arr, float(rss), diag_arr, rdiag_arr


cdef double _betacf(double a, double b, double x) except -1.0:
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, delta
    cdef int m, m2
    if fabs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def betainc_reg(double a, double b, double x):
    """See crosstalk._pykernels.betainc_reg."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    cdef double ln_front = (lgamma(a + b) - lgamma(a) - lgamma(b)
                            + a * log(x) + b * log1p(-x))
    cdef double front = exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b
