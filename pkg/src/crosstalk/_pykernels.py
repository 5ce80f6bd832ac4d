"""Numpy implementations of the numerical kernels.

This is the fallback backend behind crosstalk.kernels; the compiled
extension (_ckernels) exposes the same three functions with the same
contracts. Keep the surfaces in lockstep.
"""

from __future__ import annotations

import math

import numpy as np

_FPMIN = 1e-300
_CF_EPS = 3e-16
_CF_MAX_ITER = 400


def prefix_rss(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Residual sums of squares for every column prefix of a design matrix.

    Parameters
    ----------
    X : ndarray, shape (n, p)
        Design matrix, n >= p.
    y : ndarray, shape (n,)
        Regressand.

    Returns
    -------
    rss : ndarray, shape (p + 1,)
        rss[k] is the least-squares RSS of y on the first k columns;
        rss[0] is the squared norm of y.
    rdiag : ndarray, shape (p,)
        Diagonal of the R factor, for rank diagnostics (signs are
        implementation specific; compare magnitudes only).

    Nested models share one orthogonal decomposition: each prefix RSS is
    the full RSS plus the squared rotated-y entries beyond the prefix.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    if y.shape[0] != n:
        raise ValueError("X and y row counts differ")
    if n < p:
        raise ValueError(f"need n >= p, got n={n}, p={p}")
    if p == 0:
        return np.array([float(y @ y)]), np.empty(0)
    Q, R = np.linalg.qr(X, mode="reduced")
    z = Q.T @ y
    resid = y - Q @ z
    rss = np.empty(p + 1)
    rss[p] = resid @ resid
    z2 = z * z
    rss[:p] = rss[p] + z2[::-1].cumsum()[::-1]
    return rss, np.diag(R).copy()


def ols_fit(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float, np.ndarray, np.ndarray]:
    """Least-squares fit with the inverse-Gram diagonal for standard errors.

    Returns
    -------
    beta : ndarray, shape (p,)
        Coefficients.
    rss : float
        Residual sum of squares.
    diag_inv : ndarray, shape (p,)
        Diagonal of (X'X)^-1, i.e. squared row norms of R^-1.
    rdiag : ndarray, shape (p,)
        Diagonal of R, for rank diagnostics.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    if y.shape[0] != n:
        raise ValueError("X and y row counts differ")
    if n < p or p == 0:
        raise ValueError(f"need n >= p >= 1, got n={n}, p={p}")
    Q, R = np.linalg.qr(X, mode="reduced")
    z = Q.T @ y
    resid = y - Q @ z
    rss = float(resid @ resid)
    rdiag = np.diag(R).copy()
    if np.any(np.abs(rdiag) < 1e-12 * max(1.0, np.abs(rdiag).max())):
        # caller decides how to surface rank deficiency
        beta = np.full(p, np.nan)
        diag_inv = np.full(p, np.inf)
        return beta, rss, diag_inv, rdiag
    beta = np.linalg.solve(R, z)
    rinv = np.linalg.solve(R, np.eye(p))
    diag_inv = (rinv * rinv).sum(axis=1)
    return beta, rss, diag_inv, rdiag


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b).

    Continued-fraction evaluation (modified Lentz), switched at
    x = (a+1)/(a+b+2) to its mirrored form so the fraction always
    converges fast. Absolute error is well below 1e-12 over the
    degrees-of-freedom range used by the F tests here.
    """
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")
