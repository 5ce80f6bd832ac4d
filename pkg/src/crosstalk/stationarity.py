"""Unit-root testing and series stationarization.

The augmented Dickey-Fuller regression here uses a constant and no
trend: dy_t = c + g*y_{t-1} + sum_i d_i*dy_{t-i} + e_t. The lag depth
is chosen by AIC over a fixed estimation window so candidate scores are
comparable, then the statistic is refit at the chosen depth on the
longest window that depth allows. All least squares goes through one
orthogonal decomposition per design matrix (crosstalk.kernels).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .core import MetricKind, MetricSeries, PhaseLabel, TenantId, slice_phase
from .errors import ConstantSeries, InsufficientSamples, InvalidConfig, SingularRegression

# Critical values of the studentized unit-root statistic, constant case,
# rows by effective sample size. Columns: 1%, 5%, 10%.
_CRITICAL_ROWS: tuple[tuple[float, tuple[float, float, float]], ...] = (
    (25.0, (-3.75, -3.00, -2.63)),
    (50.0, (-3.58, -2.93, -2.60)),
    (100.0, (-3.51, -2.89, -2.58)),
    (250.0, (-3.46, -2.88, -2.57)),
    (500.0, (-3.44, -2.87, -2.57)),
    (math.inf, (-3.43, -2.86, -2.57)),
)

_ALPHA_COLUMN = {0.01: 0, 0.05: 1, 0.10: 2}

_RANK_TOL = 1e-10


class PValueBand(str, Enum):
    BELOW_01 = "<0.01"
    BELOW_05 = "<0.05"
    BELOW_10 = "<0.10"
    ABOVE_10 = ">=0.10"


@dataclass(frozen=True)
class AdfResult:
    """Outcome of one unit-root test."""

    statistic: float
    lag: int
    n_effective: int
    p_band: PValueBand
    stationary: bool
    critical_values: tuple[float, float, float]  # 1%, 5%, 10%


@dataclass(frozen=True)
class StationarizedSeries:
    """A phase slice differenced until the unit-root null is rejected.

    values holds the transformed series; original_values the order-zero
    phase slice it came from. When even the deepest differencing fails
    the test, non_stationary is set and the caller decides whether to
    exclude the series.
    """

    tenant: TenantId
    metric: MetricKind
    phase: PhaseLabel
    values: np.ndarray
    original_values: np.ndarray
    difference_order: int
    adf: AdfResult
    non_stationary: bool


def default_max_lag(n: int) -> int:
    """Depth-of-search default that grows with the fourth root of n."""
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def critical_values(n_effective: int) -> tuple[float, float, float]:
    """Critical values interpolated between table rows.

    Rows are tabulated at finite sizes plus the limit, so interpolation
    runs on 1/n, which is linear through the finite rows and reaches the
    limit row exactly as n grows.
    """
    if n_effective <= 0:
        raise InsufficientSamples("critical values need a positive sample size")
    u = 1.0 / float(n_effective)
    points = [(0.0 if math.isinf(row_n) else 1.0 / row_n, vals)
              for row_n, vals in _CRITICAL_ROWS]
    points.sort(key=lambda p: p[0])  # ascending in 1/n: inf row first
    if u >= points[-1][0]:
        return points[-1][1]
    for (u_lo, v_lo), (u_hi, v_hi) in zip(points, points[1:]):
        if u_lo <= u <= u_hi:
            w = (u - u_lo) / (u_hi - u_lo)
            return tuple(a + w * (b - a) for a, b in zip(v_lo, v_hi))
    raise AssertionError("unreachable")


def _band(statistic: float, cv: tuple[float, float, float]) -> PValueBand:
    c1, c5, c10 = cv
    if statistic < c1:
        return PValueBand.BELOW_01
    if statistic < c5:
        return PValueBand.BELOW_05
    if statistic < c10:
        return PValueBand.BELOW_10
    return PValueBand.ABOVE_10


def _lag_design(x: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Regressand and design [const, level, dy lags 1..k], trimmed at k."""
    dx = np.diff(x)
    n1 = dx.shape[0]
    rows = n1 - k
    cols = [np.ones(rows), x[k : x.shape[0] - 1]]
    for i in range(1, k + 1):
        cols.append(dx[k - i : n1 - i])
    return dx[k:], np.column_stack(cols)


def adf_test(
    values: np.ndarray,
    max_lag: int | None = None,
    alpha: float = 0.05,
) -> AdfResult:
    """Augmented Dickey-Fuller test with AIC-selected lag depth.

    Parameters
    ----------
    values : ndarray
        Level series, length n >= max_lag + 10.
    max_lag : int, optional
        Search depth; defaults to the fourth-root rule.
    alpha : float
        Decision level; one of 0.01, 0.05, 0.10 (the statistic maps to
        bands, not continuous p-values).

    AIC scores all depths on one shared estimation window (trimmed at
    max_lag) so their likelihoods are comparable; ties prefer the
    smaller depth. The reported statistic is refit at the chosen depth
    using every sample that depth allows.
    """
    if alpha not in _ALPHA_COLUMN:
        raise InvalidConfig(f"alpha must be one of {sorted(_ALPHA_COLUMN)}, got {alpha}")
    x = np.asarray(values, dtype=np.float64)
    n = x.shape[0]
    if max_lag is None:
        L = default_max_lag(n)
    else:
        L = int(max_lag)
        if L < 0:
            raise InvalidConfig(f"max_lag must be non-negative, got {L}")
    if n < L + 10:
        raise InsufficientSamples(f"need n >= max_lag + 10, got n={n}, max_lag={L}")
    if n - 1 - L < L + 4:
        raise InsufficientSamples(
            f"series too short for max_lag={L}: estimation window has {n - 1 - L} rows"
        )
    if float(np.ptp(x)) == 0.0:
        raise ConstantSeries("series is constant")

    dy, X = _lag_design(x, L)
    n_sel = dy.shape[0]
    rss, rdiag = kernels.prefix_rss(X, dy)
    scale = max(1.0, float(np.abs(rdiag).max()))
    if np.any(np.abs(rdiag) < _RANK_TOL * scale):
        raise SingularRegression("unit-root design is rank deficient")
    best_k = 0
    best_aic = math.inf
    for k in range(0, L + 1):
        r = rss[k + 2]
        if r <= 0.0:
            raise SingularRegression("zero residual in lag selection")
        aic = n_sel * math.log(r / n_sel) + 2.0 * (k + 2)
        if aic < best_aic:
            best_aic = aic
            best_k = k

    dy2, X2 = _lag_design(x, best_k)
    n_eff = dy2.shape[0]
    beta, rss2, diag_inv, rdiag2 = kernels.ols_fit(X2, dy2)
    if not np.all(np.isfinite(beta)):
        raise SingularRegression("unit-root regression is rank deficient")
    dof = n_eff - (best_k + 2)
    if dof <= 0:
        raise InsufficientSamples("no residual degrees of freedom")
    sigma2 = rss2 / dof
    se = math.sqrt(sigma2 * diag_inv[1])
    if se == 0.0:
        raise SingularRegression("zero standard error for the level coefficient")
    stat = float(beta[1]) / se
    cv = critical_values(n_eff)
    return AdfResult(
        statistic=stat,
        lag=best_k,
        n_effective=n_eff,
        p_band=_band(stat, cv),
        stationary=bool(stat < cv[_ALPHA_COLUMN[alpha]]),
        critical_values=cv,
    )


def stationarize(
    series: MetricSeries,
    phase: PhaseLabel,
    alpha: float = 0.05,
    max_lag: int | None = None,
    trim: int = 0,
    max_difference_order: int = 2,
) -> StationarizedSeries:
    """Difference a phase slice until the unit-root test rejects.

    Tries orders 0, 1, .. max_difference_order; the first stationary
    order wins. If none passes, the deepest order is returned with
    non_stationary set.
    """
    original = slice_phase(series, phase, trim=trim).values
    values = original
    result = None
    for order in range(max_difference_order + 1):
        if order > 0:
            values = np.diff(values)
        result = adf_test(values, max_lag=max_lag, alpha=alpha)
        if result.stationary:
            return StationarizedSeries(
                tenant=series.tenant,
                metric=series.metric,
                phase=phase,
                values=values,
                original_values=original,
                difference_order=order,
                adf=result,
                non_stationary=False,
            )
    return StationarizedSeries(
        tenant=series.tenant,
        metric=series.metric,
        phase=phase,
        values=values,
        original_values=original,
        difference_order=max_difference_order,
        adf=result,
        non_stationary=True,
    )
