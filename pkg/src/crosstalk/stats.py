"""Impact statistics, distribution signatures, and coupling.

Stage-one quantities (percent change, effect size, dispersion), the
ECDF machinery used to characterize how a distribution degrades, and
the symmetric coupling index between two tenants' series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import MetricKind, MetricSeries, PhaseLabel, TenantId, slice_phase
from .errors import (
    ConstantSeries,
    DegenerateBaseline,
    DegenerateMean,
    InsufficientSamples,
    ZeroVariance,
)

DEFAULT_EPS = 1e-9

_HIST_BINS = 100


@dataclass(frozen=True)
class PhaseStats:
    """Sample mean, sample standard deviation (ddof=1), and count."""

    mean: float
    std: float
    n: int


@dataclass(frozen=True)
class ImpactRecord:
    """Aggregated impact of one phase on one tenant's metric.

    pct_change and cohens_d are means over rounds; cv is the
    coefficient of variation of the per-round percent changes and is
    None when fewer than two rounds are available.
    """

    tenant: TenantId
    metric: MetricKind
    phase: PhaseLabel
    pct_change: float
    cohens_d: float
    cv: float | None


class SignatureClass(str, Enum):
    UNIFORM_SHIFT = "UniformShift"
    TAIL_FLATTENING = "TailFlattening"
    STEP_SATURATION = "StepSaturation"
    NO_DEGRADATION = "NoDegradation"


@dataclass(frozen=True)
class SignatureFeatures:
    """Distribution-shape features of a degraded phase vs its baseline.

    median_shift_pct : percent change of the median.
    tail_flatness    : degraded P95 over baseline P95.
    step_height      : metric value at the heaviest degraded histogram bin.
    step_sharpness   : probability mass of that bin (0..1].
    """

    median_shift_pct: float
    tail_flatness: float
    step_height: float
    step_sharpness: float


@dataclass(frozen=True)
class SignatureThresholds:
    """Decision boundaries for classify(); defaults match the rule set."""

    step_sharpness_min: float = 0.35
    tail_flatness_max: float = 0.60
    median_shift_abs_max: float = 40.0
    uniform_shift_max_pct: float = -15.0


def phase_stats(values: np.ndarray) -> PhaseStats:
    """Mean, sample std, and count of a phase slice (needs n >= 2)."""
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    if n < 2:
        raise InsufficientSamples(f"phase statistics need >= 2 samples, got {n}")
    return PhaseStats(mean=float(values.mean()), std=float(values.std(ddof=1)), n=n)


def pct_change(baseline: PhaseStats, degraded: PhaseStats, eps: float = DEFAULT_EPS) -> float:
    """Percent change of the mean relative to baseline."""
    if abs(baseline.mean) <= eps:
        raise DegenerateBaseline(f"baseline mean {baseline.mean} within eps={eps}")
    return 100.0 * (degraded.mean - baseline.mean) / baseline.mean


def cohens_d(baseline: PhaseStats, degraded: PhaseStats) -> float:
    """Standardized mean difference using the quadratic-mean pooled std."""
    pooled = math.sqrt((baseline.std ** 2 + degraded.std ** 2) / 2.0)
    if pooled == 0.0:
        raise ZeroVariance("both phases have zero variance")
    return (degraded.mean - baseline.mean) / pooled


def coefficient_of_variation(values: np.ndarray, eps: float = DEFAULT_EPS) -> float:
    """Relative dispersion in percent: 100 * std / |mean| (ddof=1)."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] < 2:
        raise InsufficientSamples("coefficient of variation needs >= 2 values")
    mean = float(values.mean())
    if abs(mean) <= eps:
        raise DegenerateMean(f"mean {mean} within eps={eps}")
    return 100.0 * float(values.std(ddof=1)) / abs(mean)


@dataclass(frozen=True)
class EcdfCurve:
    """Right-continuous empirical CDF of a sample."""

    sorted_values: np.ndarray
    n: int

    def evaluate(self, x: float) -> float:
        """Fraction of the sample <= x."""
        return float(np.searchsorted(self.sorted_values, x, side="right")) / self.n

    def quantile(self, q: float) -> float:
        """Nearest-rank quantile: smallest sample value v with F(v) >= q."""
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"quantile level must be in [0, 1], got {q}")
        if q == 0.0:
            return float(self.sorted_values[0])
        rank = math.ceil(q * self.n)
        return float(self.sorted_values[rank - 1])

    def as_columns(self) -> tuple[np.ndarray, np.ndarray]:
        """(value, cumulative probability) columns for plotting."""
        probs = np.arange(1, self.n + 1, dtype=np.float64) / self.n
        return self.sorted_values, probs


def ecdf(values: np.ndarray) -> EcdfCurve:
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] == 0:
        raise InsufficientSamples("ECDF of an empty sample")
    s = np.sort(values)
    s.flags.writeable = False
    return EcdfCurve(sorted_values=s, n=s.shape[0])


def signature_features(
    baseline: np.ndarray,
    degraded: np.ndarray,
    eps: float = DEFAULT_EPS,
) -> SignatureFeatures:
    """Shape features comparing a degraded sample against its baseline.

    The step detector histograms the degraded sample into 100 equal-width
    bins over its own range; the heaviest bin gives the step location
    (bin center) and its probability mass the sharpness. Ties go to the
    lowest bin, and a constant sample is one maximal step.
    """
    base = ecdf(baseline)
    degr = ecdf(degraded)
    med_b = base.quantile(0.5)
    if med_b <= eps:
        raise DegenerateBaseline(f"baseline median {med_b} within eps={eps}")
    med_d = degr.quantile(0.5)
    p95_b = base.quantile(0.95)
    p95_d = degr.quantile(0.95)
    if p95_b <= eps:
        raise DegenerateBaseline(f"baseline P95 {p95_b} within eps={eps}")
    lo = float(degr.sorted_values[0])
    hi = float(degr.sorted_values[-1])
    if hi - lo <= 0.0:
        height, sharpness = lo, 1.0
    else:
        counts, edges = np.histogram(degr.sorted_values, bins=_HIST_BINS, range=(lo, hi))
        peak = int(np.argmax(counts))
        height = float((edges[peak] + edges[peak + 1]) / 2.0)
        sharpness = float(counts[peak]) / degr.n
    return SignatureFeatures(
        median_shift_pct=100.0 * (med_d - med_b) / med_b,
        tail_flatness=p95_d / p95_b,
        step_height=height,
        step_sharpness=sharpness,
    )


def classify(
    features: SignatureFeatures,
    thresholds: SignatureThresholds | None = None,
) -> SignatureClass:
    """Assign a degradation signature; rule order is part of the contract.

    Step saturation wins over tail flattening, which wins over a uniform
    shift; anything else is no degradation.
    """
    t = thresholds or SignatureThresholds()
    if features.step_sharpness >= t.step_sharpness_min:
        return SignatureClass.STEP_SATURATION
    if (
        features.tail_flatness <= t.tail_flatness_max
        and abs(features.median_shift_pct) < t.median_shift_abs_max
    ):
        return SignatureClass.TAIL_FLATTENING
    if features.median_shift_pct <= t.uniform_shift_max_pct:
        return SignatureClass.UNIFORM_SHIFT
    return SignatureClass.NO_DEGRADATION


def coupling_index(
    a: MetricSeries,
    b: MetricSeries,
    phase: PhaseLabel,
    trim: int = 0,
) -> float:
    """Symmetric co-movement of two series within one phase.

    Both series are sliced to the phase, first-differenced to strip
    levels and drifts, and scored by the absolute Pearson correlation,
    so the index lies in [0, 1] and is order independent.
    """
    xa = np.diff(slice_phase(a, phase, trim=trim).values)
    xb = np.diff(slice_phase(b, phase, trim=trim).values)
    if xa.shape[0] != xb.shape[0]:
        raise InsufficientSamples("phase slices differ in length")
    if xa.shape[0] < 2:
        raise InsufficientSamples("coupling needs >= 3 samples per phase")
    if float(xa.std()) == 0.0 or float(xb.std()) == 0.0:
        raise ConstantSeries("differenced series is constant within the phase")
    da = xa - xa.mean()
    db = xb - xb.mean()
    # elementwise products commute exactly, so the index is bit-identical
    # under argument swap
    num = float(np.sum(da * db))
    den = math.sqrt(float(np.sum(da * da)) * float(np.sum(db * db)))
    return min(abs(num / den), 1.0)
