"""Impact statistics, ECDF, signature features, coupling index."""

import numpy as np
import pytest

from crosstalk.core import MetricKind, PhaseLabel
from crosstalk.errors import (
    ConstantSeries,
    DegenerateBaseline,
    DegenerateMean,
    InsufficientSamples,
    ZeroVariance,
)
from crosstalk.stats import (
    SignatureClass,
    SignatureFeatures,
    SignatureThresholds,
    classify,
    coefficient_of_variation,
    cohens_d,
    coupling_index,
    ecdf,
    pct_change,
    phase_stats,
    signature_features,
)

from test_core import make_series


class TestPhaseStats:
    def test_hand_values(self):
        s = phase_stats(np.array([2.0, 4.0, 6.0]))
        assert s.mean == 4.0
        assert s.std == pytest.approx(2.0)
        assert s.n == 3

    def test_needs_two_samples(self):
        with pytest.raises(InsufficientSamples):
            phase_stats(np.array([1.0]))


class TestPctChange:
    def test_hand_values(self):
        b = phase_stats(np.array([10.0, 10.0]))
        d = phase_stats(np.array([6.0, 6.0]))
        assert pct_change(b, d) == pytest.approx(-40.0)

    def test_sign_for_negative_baseline(self):
        b = phase_stats(np.array([-10.0, -10.0]))
        d = phase_stats(np.array([-5.0, -5.0]))
        # moving toward zero from a negative baseline is a negative change
        assert pct_change(b, d) == pytest.approx(-50.0)

    def test_degenerate_baseline(self):
        b = phase_stats(np.array([1e-12, -1e-12]))
        d = phase_stats(np.array([1.0, 1.0]))
        with pytest.raises(DegenerateBaseline):
            pct_change(b, d)


class TestCohensD:
    def test_hand_values(self):
        b = phase_stats(np.array([0.0, 2.0, 4.0]))   # mean 2, std 2
        d = phase_stats(np.array([4.0, 6.0, 8.0]))   # mean 6, std 2
        assert cohens_d(b, d) == pytest.approx(2.0)

    def test_pooled_std_is_quadratic_mean(self):
        b = phase_stats(np.array([0.0, 0.0, 3.0, 3.0]))
        d = phase_stats(np.array([10.0, 10.0, 10.0 + 4.0, 14.0]))
        pooled = np.sqrt((b.std ** 2 + d.std ** 2) / 2.0)
        assert cohens_d(b, d) == pytest.approx((d.mean - b.mean) / pooled)

    def test_zero_variance(self):
        b = phase_stats(np.array([1.0, 1.0]))
        d = phase_stats(np.array([2.0, 2.0]))
        with pytest.raises(ZeroVariance):
            cohens_d(b, d)


class TestCoefficientOfVariation:
    def test_hand_values(self):
        vals = np.array([9.0, 10.0, 11.0])
        assert coefficient_of_variation(vals) == pytest.approx(10.0)

    def test_negative_mean_uses_magnitude(self):
        vals = np.array([-9.0, -10.0, -11.0])
        assert coefficient_of_variation(vals) == pytest.approx(10.0)

    def test_errors(self):
        with pytest.raises(InsufficientSamples):
            coefficient_of_variation(np.array([1.0]))
        with pytest.raises(DegenerateMean):
            coefficient_of_variation(np.array([-1.0, 1.0]))


class TestEcdf:
    def test_evaluate_step_semantics(self):
        c = ecdf(np.array([3.0, 1.0, 2.0, 2.0]))
        assert c.evaluate(0.5) == 0.0
        assert c.evaluate(1.0) == 0.25
        assert c.evaluate(2.0) == 0.75    # right continuous: includes ties
        assert c.evaluate(2.5) == 0.75
        assert c.evaluate(3.0) == 1.0
        assert c.evaluate(99.0) == 1.0

    def test_nearest_rank_quantile(self):
        c = ecdf(np.arange(1.0, 11.0))
        assert c.quantile(0.0) == 1.0
        assert c.quantile(0.05) == 1.0
        assert c.quantile(0.5) == 5.0
        assert c.quantile(0.95) == 10.0
        assert c.quantile(1.0) == 10.0
        with pytest.raises(ValueError):
            c.quantile(1.5)

    def test_as_columns(self):
        c = ecdf(np.array([5.0, 1.0]))
        vals, probs = c.as_columns()
        np.testing.assert_array_equal(vals, [1.0, 5.0])
        np.testing.assert_array_equal(probs, [0.5, 1.0])

    def test_empty_rejected(self):
        with pytest.raises(InsufficientSamples):
            ecdf(np.array([]))


class TestSignatureFeatures:
    def test_uniform_shift_features(self):
        rng = np.random.default_rng(7)
        base = rng.normal(100.0, 3.0, 500)
        degraded = base * 0.6
        f = signature_features(base, degraded)
        assert f.median_shift_pct == pytest.approx(-40.0, abs=1.5)
        assert f.tail_flatness == pytest.approx(0.6, abs=0.05)
        assert f.step_sharpness < 0.35

    def test_constant_degraded_is_one_step(self):
        base = np.linspace(90.0, 110.0, 200)
        f = signature_features(base, np.full(200, 55.0))
        assert f.step_sharpness == 1.0
        assert f.step_height == 55.0

    def test_degenerate_baseline_median(self):
        with pytest.raises(DegenerateBaseline):
            signature_features(np.zeros(50), np.ones(50))


class TestClassify:
    def test_rule_order_step_beats_tail(self):
        f = SignatureFeatures(median_shift_pct=-30.0, tail_flatness=0.5,
                              step_height=1.0, step_sharpness=0.5)
        assert classify(f) == SignatureClass.STEP_SATURATION

    def test_tail_requires_small_median_shift(self):
        f = SignatureFeatures(median_shift_pct=-40.0, tail_flatness=0.5,
                              step_height=1.0, step_sharpness=0.1)
        assert classify(f) == SignatureClass.UNIFORM_SHIFT
        f2 = SignatureFeatures(median_shift_pct=-39.0, tail_flatness=0.5,
                               step_height=1.0, step_sharpness=0.1)
        assert classify(f2) == SignatureClass.TAIL_FLATTENING

    def test_uniform_shift_threshold(self):
        f = SignatureFeatures(median_shift_pct=-15.0, tail_flatness=0.9,
                              step_height=1.0, step_sharpness=0.1)
        assert classify(f) == SignatureClass.UNIFORM_SHIFT
        f2 = SignatureFeatures(median_shift_pct=-14.9, tail_flatness=0.9,
                               step_height=1.0, step_sharpness=0.1)
        assert classify(f2) == SignatureClass.NO_DEGRADATION

    def test_custom_thresholds(self):
        f = SignatureFeatures(median_shift_pct=-10.0, tail_flatness=0.9,
                              step_height=1.0, step_sharpness=0.1)
        t = SignatureThresholds(uniform_shift_max_pct=-5.0)
        assert classify(f, t) == SignatureClass.UNIFORM_SHIFT


class TestCouplingIndex:
    def _series_pair(self, flip=False):
        rng = np.random.default_rng(42)
        n = 40
        base = np.cumsum(rng.normal(0.0, 1.0, n)) + 50.0
        other = (-2.0 if flip else 2.0) * base + rng.normal(0.0, 0.01, n) + 100.0
        phases = np.array(["baseline"] * n)
        a = make_series("tenant-a", MetricKind.CPU_USAGE, n=n, values=base, phases=phases)
        b = make_series("tenant-b", MetricKind.CPU_USAGE, n=n, values=other, phases=phases)
        return a, b

    def test_symmetric_and_bounded(self):
        a, b = self._series_pair()
        ab = coupling_index(a, b, PhaseLabel.BASELINE)
        ba = coupling_index(b, a, PhaseLabel.BASELINE)
        assert ab == ba
        assert 0.0 <= ab <= 1.0
        assert ab > 0.99

    def test_anticorrelation_counts_as_coupling(self):
        a, b = self._series_pair(flip=True)
        assert coupling_index(a, b, PhaseLabel.BASELINE) > 0.99

    def test_level_shifts_ignored(self):
        # differencing strips a linear drift down to a constant offset
        n = 60
        rng = np.random.default_rng(3)
        noise = rng.normal(0.0, 1.0, n)
        phases = np.array(["baseline"] * n)
        a = make_series("a", MetricKind.CPU_USAGE, n=n, values=noise + 100.0, phases=phases)
        b = make_series("b", MetricKind.CPU_USAGE, n=n,
                        values=noise + 0.5 * np.arange(n), phases=phases)
        assert coupling_index(a, b, PhaseLabel.BASELINE) > 0.95

    def test_constant_phase_rejected(self):
        n = 30
        phases = np.array(["baseline"] * n)
        a = make_series("a", MetricKind.CPU_USAGE, n=n, values=np.full(n, 5.0), phases=phases)
        b = make_series("b", MetricKind.CPU_USAGE, n=n,
                        values=np.arange(n, dtype=float) + 1.0, phases=phases)
        with pytest.raises(ConstantSeries):
            coupling_index(a, b, PhaseLabel.BASELINE)
