"""Domain model: schedules, series, rounds, phase slicing."""

import numpy as np
import pytest

from crosstalk.core import (
    ExperimentRound,
    MetricKind,
    MetricSeries,
    PhaseLabel,
    PhaseSchedule,
    phase_run_order,
    slice_phase,
)
from crosstalk.errors import (
    InsufficientSamples,
    InvalidSeries,
    NonContiguousPhase,
    NonUniformTimestep,
    PhaseAbsent,
)


def make_series(tenant="tenant-a", metric=MetricKind.CPU_USAGE, n=30, step=2.0,
                phases=None, values=None):
    ts = np.arange(n) * step
    if values is None:
        values = np.linspace(1.0, 2.0, n)
    if phases is None:
        phases = np.array(
            [PhaseLabel.BASELINE.value] * (n // 2)
            + [PhaseLabel.CPU_NOISE.value] * (n - n // 2)
        )
    return MetricSeries(tenant, metric, ts, np.asarray(values, float), phases)


class TestPhaseSchedule:
    def test_default_is_seven_equal_phases(self):
        sched = PhaseSchedule.default()
        assert sched.labels == tuple(PhaseLabel)
        assert sched.total_duration == 7000.0

    def test_labels_for_assigns_by_offset(self):
        sched = PhaseSchedule((
            (PhaseLabel.BASELINE, 10.0),
            (PhaseLabel.CPU_NOISE, 10.0),
        ))
        got = sched.labels_for(np.array([100.0, 105.0, 110.0, 119.0, 130.0]))
        assert list(got) == ["baseline", "baseline", "cpu_noise", "cpu_noise", "cpu_noise"]

    def test_rejects_duplicate_and_nonpositive(self):
        with pytest.raises(InvalidSeries):
            PhaseSchedule((
                (PhaseLabel.BASELINE, 10.0),
                (PhaseLabel.BASELINE, 10.0),
            ))
        with pytest.raises(InvalidSeries):
            PhaseSchedule(((PhaseLabel.BASELINE, 0.0),))
        with pytest.raises(InvalidSeries):
            PhaseSchedule(())


class TestMetricSeries:
    def test_arrays_frozen_readonly(self):
        s = make_series()
        with pytest.raises(ValueError):
            s.values[0] = 99.0
        assert len(s) == 30
        assert s.step == 2.0

    def test_rejects_nonuniform_grid(self):
        ts = np.array([0.0, 2.0, 5.0, 6.0])
        with pytest.raises(NonUniformTimestep):
            MetricSeries("t", MetricKind.CPU_USAGE, ts, np.ones(4),
                         np.array(["baseline"] * 4))

    def test_rejects_decreasing_and_nonfinite(self):
        with pytest.raises(NonUniformTimestep):
            MetricSeries("t", MetricKind.CPU_USAGE, np.array([0.0, -2.0]),
                         np.ones(2), np.array(["baseline"] * 2))
        with pytest.raises(InvalidSeries):
            MetricSeries("t", MetricKind.CPU_USAGE, np.array([0.0, 2.0]),
                         np.array([1.0, np.nan]), np.array(["baseline"] * 2))

    def test_rejects_unknown_phase_and_length_mismatch(self):
        with pytest.raises(InvalidSeries):
            make_series(phases=np.array(["baseline"] * 15 + ["warmup"] * 15))
        with pytest.raises(InvalidSeries):
            MetricSeries("t", MetricKind.CPU_USAGE, np.arange(3.0), np.ones(2),
                         np.array(["baseline"] * 3))


class TestExperimentRound:
    def _round(self):
        series = {}
        for t in ("tenant-a", "tenant-b"):
            for m in (MetricKind.CPU_USAGE, MetricKind.DISK_IO):
                series[(t, m)] = make_series(t, m)
        return ExperimentRound(1, series)

    def test_tenants_and_metrics_sorted(self):
        r = self._round()
        assert r.tenants == ("tenant-a", "tenant-b")
        assert r.metrics == (MetricKind.CPU_USAGE, MetricKind.DISK_IO)
        assert r.phase_run_lengths() == {
            PhaseLabel.BASELINE: 15, PhaseLabel.CPU_NOISE: 15,
        }

    def test_rejects_incomplete_grid(self):
        series = {
            ("tenant-a", MetricKind.CPU_USAGE): make_series("tenant-a"),
            ("tenant-b", MetricKind.CPU_USAGE): make_series("tenant-b"),
            ("tenant-b", MetricKind.DISK_IO): make_series("tenant-b", MetricKind.DISK_IO),
        }
        with pytest.raises(InvalidSeries, match="missing series"):
            ExperimentRound(1, series)

    def test_rejects_mismatched_key(self):
        series = {("tenant-a", MetricKind.CPU_USAGE): make_series("tenant-b")}
        with pytest.raises(InvalidSeries):
            ExperimentRound(1, series)

    def test_rejects_disagreeing_grids(self):
        series = {
            ("tenant-a", MetricKind.CPU_USAGE): make_series("tenant-a", n=30),
            ("tenant-b", MetricKind.CPU_USAGE): make_series("tenant-b", n=30, step=3.0),
        }
        with pytest.raises(InvalidSeries, match="time grid"):
            ExperimentRound(1, series)


class TestSlicePhase:
    def test_extracts_contiguous_run(self):
        s = make_series(n=20)
        base = slice_phase(s, PhaseLabel.BASELINE)
        assert len(base) == 10
        assert base.timestamps[0] == 0.0
        noise = slice_phase(s, PhaseLabel.CPU_NOISE)
        assert noise.timestamps[0] == 20.0

    def test_trim_drops_leading_samples(self):
        s = make_series(n=20)
        trimmed = slice_phase(s, PhaseLabel.BASELINE, trim=3)
        assert len(trimmed) == 7
        assert trimmed.timestamps[0] == 6.0
        with pytest.raises(InsufficientSamples):
            slice_phase(s, PhaseLabel.BASELINE, trim=10)
        with pytest.raises(InvalidSeries):
            slice_phase(s, PhaseLabel.BASELINE, trim=-1)

    def test_absent_and_split_phases(self):
        s = make_series(n=20)
        with pytest.raises(PhaseAbsent):
            slice_phase(s, PhaseLabel.RECOVERY)
        split = np.array(["baseline"] * 5 + ["cpu_noise"] * 5 + ["baseline"] * 10)
        s2 = make_series(n=20, phases=split)
        with pytest.raises(NonContiguousPhase):
            slice_phase(s2, PhaseLabel.BASELINE)
        with pytest.raises(NonContiguousPhase):
            phase_run_order(split)

    def test_run_order(self):
        s = make_series(n=20)
        assert phase_run_order(s.phases) == (PhaseLabel.BASELINE, PhaseLabel.CPU_NOISE)
