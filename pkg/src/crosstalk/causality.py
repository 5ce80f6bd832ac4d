"""Directed predictive-causality tests and per-phase causal graphs.

For a source x and target y the test compares a restricted
autoregression of y on its own q lags against an unrestricted one that
adds q lags of x, via the standard F ratio on residual sums of squares.
q is chosen by AIC on the unrestricted model. Both stages run on a
single orthogonal decomposition each: columns are ordered so every
candidate (and the restricted model itself) is a prefix of the design
matrix, which also makes the RSS nesting hold exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import ExperimentRound, MetricKind, PhaseLabel, TenantId
from .errors import (
    ConstantSeries,
    EmptyBaselineGraph,
    InsufficientSamples,
    InvalidConfig,
    SingularRegression,
)
from .stationarity import StationarizedSeries, stationarize

NodeId = tuple[TenantId, MetricKind]

DEFAULT_MAX_LAG = 10
DEFAULT_ALPHA = 0.05
REVERSE_NULL_P = 0.10

_RANK_TOL = 1e-10


def f_distribution_cdf(x: float, d1: int, d2: int) -> float:
    """CDF of the F distribution with (d1, d2) degrees of freedom.

    Evaluated through the regularized incomplete beta function; for a
    survival probability use f_distribution_sf, which avoids the
    cancellation of computing 1 - cdf for large x.
    """
    if d1 < 1 or d2 < 1:
        raise InvalidConfig(f"degrees of freedom must be >= 1, got ({d1}, {d2})")
    if x <= 0.0:
        return 0.0
    z = d1 * x / (d1 * x + d2)
    return kernels.betainc_reg(d1 / 2.0, d2 / 2.0, z)


def f_distribution_sf(x: float, d1: int, d2: int) -> float:
    """Survival function 1 - CDF, computed directly."""
    if d1 < 1 or d2 < 1:
        raise InvalidConfig(f"degrees of freedom must be >= 1, got ({d1}, {d2})")
    if x <= 0.0:
        return 1.0
    z = d2 / (d2 + d1 * x)
    return kernels.betainc_reg(d2 / 2.0, d1 / 2.0, z)


@dataclass(frozen=True)
class GrangerResult:
    """One directed test: does the source's past improve the target's fit."""

    f_stat: float
    p_value: float
    lag: int
    n_effective: int
    source: NodeId | None = None
    target: NodeId | None = None
    phase: PhaseLabel | None = None
    difference_order: int = 0


@dataclass(frozen=True)
class BidirectionalResult:
    """Forward and reverse tests of one pair, with the asymmetry verdict."""

    forward: GrangerResult
    reverse: GrangerResult
    asymmetric: bool


def _own_lag_design(y: np.ndarray, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Regressand and [const, y1, .., yL] trimmed at L.

    Every candidate depth q is a prefix of width 1 + q, so one
    decomposition scores all depths.
    """
    n = y.shape[0]
    rows = n - L
    cols = [np.ones(rows)]
    for i in range(1, L + 1):
        cols.append(y[L - i : n - i])
    return y[L:], np.column_stack(cols)


def _blocked_design(x: np.ndarray, y: np.ndarray, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Regressand and [const, y1..yq, x1..xq] trimmed at q.

    Here the restricted model is the prefix of width q + 1 and the
    unrestricted the full width 2q + 1, so one decomposition yields both
    residual sums and their difference is a sum of squares, never
    negative.
    """
    n = y.shape[0]
    rows = n - q
    cols = [np.ones(rows)]
    for i in range(1, q + 1):
        cols.append(y[q - i : n - i])
    for i in range(1, q + 1):
        cols.append(x[q - i : n - i])
    return y[q:], np.column_stack(cols)


def granger_f(
    x: np.ndarray,
    y: np.ndarray,
    max_lag: int = DEFAULT_MAX_LAG,
) -> tuple[int, float, float, int]:
    """Directed test of x's past improving y's prediction.

    Returns (q, f_stat, p_value, n_effective). The depth q minimizes the
    AIC of the target's own autoregression over 1..max_lag, scored on
    one shared window trimmed at max_lag (ties prefer smaller q); the F
    comparison is then fit at q on the longest window q allows. Choosing
    q without looking at the source keeps the test's false-positive
    rate at the nominal level; selecting on the source-augmented model
    roughly doubles it, which breaks both the documented null rejection
    rate and the recovery error budget downstream.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidConfig("source and target must be equal-length 1-d arrays")
    L = int(max_lag)
    if L < 1:
        raise InvalidConfig(f"max_lag must be >= 1, got {L}")
    n = x.shape[0]
    if n < 4 * L + 20:
        raise InsufficientSamples(f"need n >= 4*max_lag + 20 = {4 * L + 20}, got {n}")

    yy, X = _own_lag_design(y, L)
    n_sel = yy.shape[0]
    rss, rdiag = kernels.prefix_rss(X, yy)
    scale = max(1.0, float(np.abs(rdiag).max()))
    if np.any(np.abs(rdiag) < _RANK_TOL * scale):
        raise SingularRegression("lagged design is rank deficient")
    best_q = 1
    best_aic = math.inf
    for q in range(1, L + 1):
        r = rss[1 + q]
        if r <= 0.0:
            raise SingularRegression("zero residual in lag selection")
        aic = n_sel * math.log(r / n_sel) + 2.0 * (q + 1)
        if aic < best_aic:
            best_aic = aic
            best_q = q

    q = best_q
    yy2, X2 = _blocked_design(x, y, q)
    n_eff = yy2.shape[0]
    rss2, rdiag2 = kernels.prefix_rss(X2, yy2)
    scale2 = max(1.0, float(np.abs(rdiag2).max()))
    if np.any(np.abs(rdiag2) < _RANK_TOL * scale2):
        raise SingularRegression("lagged design is rank deficient")
    rss_r = float(rss2[q + 1])
    rss_u = float(rss2[2 * q + 1])
    df2 = n_eff - 2 * q - 1
    if df2 <= 0:
        raise InsufficientSamples("no residual degrees of freedom")
    if rss_u <= 0.0:
        raise SingularRegression("unrestricted model has zero residual")
    f_stat = ((rss_r - rss_u) / q) / (rss_u / df2)
    p = f_distribution_sf(f_stat, q, df2)
    return q, float(f_stat), float(p), n_eff


def _balance_orders(
    a: StationarizedSeries, b: StationarizedSeries
) -> tuple[np.ndarray, np.ndarray, int]:
    """Bring two stationarized series to the higher difference order."""
    order = max(a.difference_order, b.difference_order)

    def at_order(s: StationarizedSeries) -> np.ndarray:
        if s.difference_order == order:
            return s.values
        return np.diff(s.original_values, n=order) if order else s.original_values

    return at_order(a), at_order(b), order


def granger_test(
    source: StationarizedSeries,
    target: StationarizedSeries,
    max_lag: int = DEFAULT_MAX_LAG,
) -> GrangerResult:
    """Directed test between two stationarized series of one phase."""
    if source.phase != target.phase:
        raise InvalidConfig("source and target come from different phases")
    xs, ys, order = _balance_orders(source, target)
    q, f_stat, p, n_eff = granger_f(xs, ys, max_lag=max_lag)
    return GrangerResult(
        f_stat=f_stat,
        p_value=p,
        lag=q,
        n_effective=n_eff,
        source=(source.tenant, source.metric),
        target=(target.tenant, target.metric),
        phase=source.phase,
        difference_order=order,
    )


def bidirectional_test(
    a: StationarizedSeries,
    b: StationarizedSeries,
    max_lag: int = DEFAULT_MAX_LAG,
    alpha: float = DEFAULT_ALPHA,
    reverse_null_p: float = REVERSE_NULL_P,
) -> BidirectionalResult:
    """Both directions of one pair plus the one-way asymmetry verdict.

    The pair is asymmetric when the forward direction is significant at
    alpha while the reverse p-value sits above reverse_null_p.
    """
    forward = granger_test(a, b, max_lag=max_lag)
    reverse = granger_test(b, a, max_lag=max_lag)
    return BidirectionalResult(
        forward=forward,
        reverse=reverse,
        asymmetric=forward.p_value < alpha and reverse.p_value > reverse_null_p,
    )


@dataclass(frozen=True)
class GraphDiagnostics:
    """Bookkeeping for nodes and pairs that could not be tested."""

    excluded_nodes: tuple[tuple[NodeId, str], ...]
    skipped_pairs: tuple[tuple[NodeId, NodeId, str], ...]
    stationary_nodes: int
    total_nodes: int


@dataclass(frozen=True)
class CausalGraph:
    """All directed test outcomes of one phase of one round.

    links holds the significant results (p < alpha); results every
    tested ordered pair, which downstream aggregation needs to average
    p-values across rounds.
    """

    phase: PhaseLabel
    round_id: int
    alpha: float
    max_lag: int
    nodes: tuple[NodeId, ...]
    links: tuple[GrangerResult, ...]
    results: tuple[GrangerResult, ...]
    out_degree: dict[TenantId, int]
    in_degree: dict[TenantId, int]
    diagnostics: GraphDiagnostics

    @property
    def link_count(self) -> int:
        return len(self.links)


def build_graph(
    round_: ExperimentRound,
    phase: PhaseLabel,
    alpha: float = DEFAULT_ALPHA,
    max_lag: int = DEFAULT_MAX_LAG,
    trim: int = 0,
    adf_alpha: float = DEFAULT_ALPHA,
    adf_max_lag: int | None = None,
    stationarized: dict[NodeId, StationarizedSeries] | None = None,
) -> CausalGraph:
    """Test every ordered (tenant, metric) pair of one phase.

    Series are stationarized first; nodes that stay non-stationary after
    the deepest differencing, or whose test cannot run, are excluded and
    recorded. Same-tenant cross-metric pairs are tested; a node is never
    paired with itself. Pass stationarized to reuse precomputed slices.

    Parameters
    ----------
    round_ : ExperimentRound
        The round to analyze.
    phase : PhaseLabel
        Phase window to test.
    alpha : float
        Significance level for link inclusion.
    max_lag : int
        Lag-depth search bound of the pairwise tests.
    trim : int
        Leading samples dropped from the phase window.
    adf_alpha, adf_max_lag :
        Forwarded to stationarization.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidConfig(f"alpha must be in (0, 1), got {alpha}")
    excluded: list[tuple[NodeId, str]] = []
    usable: dict[NodeId, StationarizedSeries] = {}
    for key in sorted(round_.series, key=lambda k: (k[0], k[1].value)):
        if stationarized is not None and key in stationarized:
            st = stationarized[key]
        else:
            try:
                st = stationarize(
                    round_.series[key], phase,
                    alpha=adf_alpha, max_lag=adf_max_lag, trim=trim,
                )
            except (ConstantSeries, InsufficientSamples, SingularRegression) as exc:
                excluded.append((key, exc.__class__.__name__))
                continue
        if st.non_stationary:
            excluded.append((key, "non_stationary"))
            continue
        usable[key] = st

    results: list[GrangerResult] = []
    skipped: list[tuple[NodeId, NodeId, str]] = []
    nodes = tuple(usable)
    for src in nodes:
        for dst in nodes:
            if src == dst:
                continue
            try:
                results.append(granger_test(usable[src], usable[dst], max_lag=max_lag))
            except (InsufficientSamples, SingularRegression) as exc:
                skipped.append((src, dst, exc.__class__.__name__))

    links = tuple(r for r in results if r.p_value < alpha)
    out_deg: dict[TenantId, int] = {t: 0 for t in round_.tenants}
    in_deg: dict[TenantId, int] = {t: 0 for t in round_.tenants}
    for link in links:
        out_deg[link.source[0]] += 1
        in_deg[link.target[0]] += 1
    all_nodes = tuple(sorted(round_.series, key=lambda k: (k[0], k[1].value)))
    return CausalGraph(
        phase=phase,
        round_id=round_.round_id,
        alpha=alpha,
        max_lag=max_lag,
        nodes=all_nodes,
        links=links,
        results=tuple(results),
        out_degree=out_deg,
        in_degree=in_deg,
        diagnostics=GraphDiagnostics(
            excluded_nodes=tuple(excluded),
            skipped_pairs=tuple(skipped),
            stationary_nodes=len(usable),
            total_nodes=len(all_nodes),
        ),
    )


def graph_density_delta(baseline: CausalGraph, other: CausalGraph) -> float:
    """Percent change in link count relative to the baseline graph."""
    if not baseline.links:
        raise EmptyBaselineGraph("baseline graph has no links")
    return 100.0 * (other.link_count - baseline.link_count) / baseline.link_count


@dataclass(frozen=True)
class ReplicationRecord:
    """Cross-round stability of one directed pair in one phase."""

    source: NodeId
    target: NodeId
    phase: PhaseLabel
    rounds_significant: int
    rounds_tested: int
    mean_p: float
    std_p: float

    @property
    def frequency(self) -> str:
        return f"{self.rounds_significant}/{self.rounds_tested}"


def replication(graphs: Sequence[CausalGraph]) -> list[ReplicationRecord]:
    """Aggregate per-pair significance across rounds of one phase.

    Records are emitted for every pair significant in at least one
    round, ordered by descending replication count then mean p-value.
    """
    if not graphs:
        return []
    phase = graphs[0].phase
    alpha = graphs[0].alpha
    for g in graphs[1:]:
        if g.phase != phase or g.alpha != alpha:
            raise InvalidConfig("replication needs graphs of one phase and alpha")
    per_pair: dict[tuple[NodeId, NodeId], list[float]] = {}
    for g in graphs:
        for r in g.results:
            per_pair.setdefault((r.source, r.target), []).append(r.p_value)
    records = []
    for (src, dst), ps in per_pair.items():
        hits = sum(1 for p in ps if p < alpha)
        if hits == 0:
            continue
        arr = np.asarray(ps)
        records.append(
            ReplicationRecord(
                source=src,
                target=dst,
                phase=phase,
                rounds_significant=hits,
                rounds_tested=len(ps),
                mean_p=float(arr.mean()),
                std_p=float(arr.std(ddof=1)) if len(ps) > 1 else 0.0,
            )
        )
    records.sort(key=lambda r: (-r.rounds_significant, r.mean_p, r.source, r.target))
    return records
