"""Domain model for multi-tenant contention experiments.

A round of an experiment observes every tenant on every metric over the
same uniform time grid, with each sample labeled by the phase of the
contention schedule that produced it. Types here are immutable; all
operations return new objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    EmptyIntersection,
    InsufficientSamples,
    InvalidSeries,
    NonContiguousPhase,
    NonUniformTimestep,
    PhaseAbsent,
)

TenantId = str

_REL_STEP_TOL = 1e-6


class MetricKind(str, Enum):
    """Resource metric families, with their short codes used in files."""

    CPU_USAGE = "cpu"
    MEMORY_WORKING_SET = "mem"
    DISK_IO = "dsk"
    NETWORK_THROUGHPUT = "ntk"


class PhaseLabel(str, Enum):
    """Experiment phases in schedule order."""

    BASELINE = "baseline"
    CPU_NOISE = "cpu_noise"
    MEMORY_NOISE = "memory_noise"
    NETWORK_NOISE = "network_noise"
    DISK_NOISE = "disk_noise"
    COMBINED_NOISE = "combined_noise"
    RECOVERY = "recovery"


NOISE_PHASES = (
    PhaseLabel.CPU_NOISE,
    PhaseLabel.MEMORY_NOISE,
    PhaseLabel.NETWORK_NOISE,
    PhaseLabel.DISK_NOISE,
    PhaseLabel.COMBINED_NOISE,
)


@dataclass(frozen=True)
class PhaseSchedule:
    """Ordered phase layout of one experiment round.

    entries maps each phase to its duration in seconds, in execution
    order. Labels must be unique and durations positive.
    """

    entries: tuple[tuple[PhaseLabel, float], ...]

    def __post_init__(self):
        if not self.entries:
            raise InvalidSeries("schedule has no phases")
        labels = [label for label, _ in self.entries]
        if len(set(labels)) != len(labels):
            raise InvalidSeries("schedule labels are not unique")
        for label, duration in self.entries:
            if not duration > 0:
                raise InvalidSeries(f"phase {label.value} has duration {duration}")

    @classmethod
    def default(cls) -> "PhaseSchedule":
        """Seven phases of 1000 s each, in the standard order."""
        return cls(tuple((label, 1000.0) for label in PhaseLabel))

    @property
    def labels(self) -> tuple[PhaseLabel, ...]:
        return tuple(label for label, _ in self.entries)

    @property
    def total_duration(self) -> float:
        return float(sum(d for _, d in self.entries))

    def labels_for(self, timestamps: np.ndarray) -> np.ndarray:
        """Assign a phase label to each timestamp by offset from the first.

        Samples beyond the schedule end stay in the last phase.
        """
        offsets = np.asarray(timestamps, dtype=float) - float(timestamps[0])
        boundaries = np.cumsum([d for _, d in self.entries])[:-1]
        idx = np.searchsorted(boundaries, offsets, side="right")
        values = np.array([label.value for label, _ in self.entries])
        return values[idx]


@dataclass(frozen=True)
class MetricSeries:
    """One tenant's samples of one metric on a uniform time grid.

    timestamps are seconds, strictly increasing with a constant step;
    values are finite floats; phases labels each sample. Arrays are
    locked read-only on construction.
    """

    tenant: TenantId
    metric: MetricKind
    timestamps: np.ndarray
    values: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        ts = np.ascontiguousarray(self.timestamps, dtype=np.float64)
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        ph = np.asarray(self.phases)
        if ph.dtype.kind != "U":
            ph = np.array([str(p.value if isinstance(p, PhaseLabel) else p) for p in ph])
        if not self.tenant:
            raise InvalidSeries("tenant id is empty")
        n = ts.shape[0]
        if n == 0:
            raise InvalidSeries("series is empty")
        if vals.shape[0] != n or ph.shape[0] != n:
            raise InvalidSeries(
                f"length mismatch: {n} timestamps, {vals.shape[0]} values, "
                f"{ph.shape[0]} phases"
            )
        if not np.all(np.isfinite(ts)) or not np.all(np.isfinite(vals)):
            raise InvalidSeries("non-finite timestamp or value")
        if n >= 2:
            steps = np.diff(ts)
            if steps[0] <= 0 or np.any(steps <= 0):
                raise NonUniformTimestep("timestamps not strictly increasing")
            if np.any(np.abs(steps - steps[0]) > _REL_STEP_TOL * steps[0]):
                raise NonUniformTimestep("timestep is not constant")
        known = {m.value for m in PhaseLabel}
        if not set(np.unique(ph)) <= known:
            bad = sorted(set(np.unique(ph)) - known)
            raise InvalidSeries(f"unknown phase labels: {bad}")
        for arr in (ts, vals, ph):
            arr.flags.writeable = False
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "phases", ph)

    def __len__(self) -> int:
        return self.timestamps.shape[0]

    @property
    def step(self) -> float:
        if len(self) < 2:
            raise InvalidSeries("step undefined for a single sample")
        return float(self.timestamps[1] - self.timestamps[0])


@dataclass(frozen=True)
class ExperimentRound:
    """All series of one round, keyed by (tenant, metric).

    Every present tenant is observed on every present metric, and all
    series share one time grid and one phase labeling.
    """

    round_id: int
    series: Mapping[tuple[TenantId, MetricKind], MetricSeries]

    def __post_init__(self):
        if not self.series:
            raise InvalidSeries("round has no series")
        items = dict(self.series)
        tenants = sorted({t for t, _ in items})
        metrics = sorted({m for _, m in items}, key=lambda m: m.value)
        for t in tenants:
            for m in metrics:
                if (t, m) not in items:
                    raise InvalidSeries(f"missing series for ({t}, {m.value})")
        ref = next(iter(items.values()))
        for (t, m), s in items.items():
            if s.tenant != t or s.metric != m:
                raise InvalidSeries(f"series keyed ({t}, {m.value}) disagrees with its fields")
            if not np.array_equal(s.timestamps, ref.timestamps):
                raise InvalidSeries("series do not share one time grid")
            if not np.array_equal(s.phases, ref.phases):
                raise InvalidSeries("series do not share one phase labeling")
        object.__setattr__(self, "series", MappingProxyType(items))

    @property
    def tenants(self) -> tuple[TenantId, ...]:
        return tuple(sorted({t for t, _ in self.series}))

    @property
    def metrics(self) -> tuple[MetricKind, ...]:
        return tuple(sorted({m for _, m in self.series}, key=lambda m: m.value))

    @property
    def timestamps(self) -> np.ndarray:
        return next(iter(self.series.values())).timestamps

    @property
    def phases(self) -> np.ndarray:
        return next(iter(self.series.values())).phases

    def phase_run_lengths(self) -> dict[PhaseLabel, int]:
        """Sample count of each phase's contiguous run."""
        ph = self.phases
        out: dict[PhaseLabel, int] = {}
        for label in phase_run_order(ph):
            out[label] = int(np.sum(ph == label.value))
        return out


def phase_run_order(phases: np.ndarray) -> tuple[PhaseLabel, ...]:
    """Phase labels in order of first occurrence."""
    seen: list[PhaseLabel] = []
    for p in phases:
        label = PhaseLabel(str(p))
        if not seen or seen[-1] != label:
            if label in seen:
                raise NonContiguousPhase(f"phase {label.value} occurs in separate runs")
            seen.append(label)
    return tuple(seen)


def slice_phase(series: MetricSeries, phase: PhaseLabel, trim: int = 0) -> MetricSeries:
    """Extract the contiguous run of one phase, timestamps preserved.

    Parameters
    ----------
    series : MetricSeries
        Source series.
    phase : PhaseLabel
        Label whose run to extract.
    trim : int
        Leading samples to drop from the run, for settling transients.

    Raises PhaseAbsent when the label never occurs and NonContiguousPhase
    when it occurs in separate runs.
    """
    if trim < 0:
        raise InvalidSeries(f"trim must be non-negative, got {trim}")
    mask = series.phases == phase.value
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise PhaseAbsent(f"phase {phase.value} absent from series")
    if idx.size > 1 and not np.all(np.diff(idx) == 1):
        raise NonContiguousPhase(f"phase {phase.value} occurs in separate runs")
    if trim >= idx.size:
        raise InsufficientSamples(
            f"trim {trim} leaves no samples of phase {phase.value} ({idx.size} present)"
        )
    sel = slice(idx[0] + trim, idx[-1] + 1)
    return MetricSeries(
        tenant=series.tenant,
        metric=series.metric,
        timestamps=series.timestamps[sel],
        values=series.values[sel],
        phases=series.phases[sel],
    )


def align(rounds: Iterable[ExperimentRound]) -> list[ExperimentRound]:
    """Truncate rounds to a common per-phase sample count.

    After alignment every round holds the same phases with identical
    per-phase lengths, so cross-round aggregation can pair samples by
    index. Rounds already aligned are returned unchanged; truncated
    rounds get a fresh uniform grid from their own start time and step,
    since dropping interior samples would break the constant timestep.
    """
    rounds = list(rounds)
    if not rounds:
        return []
    orders = [phase_run_order(r.phases) for r in rounds]
    common = set(orders[0])
    for o in orders[1:]:
        common &= set(o)
    if not common:
        raise EmptyIntersection("rounds share no phase")
    canonical = tuple(label for label in orders[0] if label in common)
    run_lengths = [r.phase_run_lengths() for r in rounds]
    target = {label: min(rl[label] for rl in run_lengths) for label in canonical}

    out: list[ExperimentRound] = []
    for r, order, rl in zip(rounds, orders, run_lengths):
        unchanged = order == canonical and all(rl[p] == target[p] for p in canonical)
        if unchanged:
            out.append(r)
            continue
        rebuilt: dict[tuple[TenantId, MetricKind], MetricSeries] = {}
        step = next(iter(r.series.values())).step
        t0 = float(r.timestamps[0])
        for key, s in r.series.items():
            chunks = []
            for label in canonical:
                run = slice_phase(s, label)
                chunks.append(run.values[: target[label]])
            values = np.concatenate(chunks)
            labels = np.concatenate(
                [np.full(target[label], label.value) for label in canonical]
            )
            timestamps = t0 + step * np.arange(values.shape[0])
            rebuilt[key] = MetricSeries(
                tenant=s.tenant,
                metric=s.metric,
                timestamps=timestamps,
                values=values,
                phases=labels,
            )
        out.append(ExperimentRound(round_id=r.round_id, series=rebuilt))
    return out
