"""Readers and writers for experiment data.

Two input formats: a long CSV (one row per sample) and the Prometheus
range-query matrix JSON. Both produce an ExperimentRound on a shared
uniform grid; the CSV writer emits the canonical long form that
parse_csv round-trips byte for byte.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ExperimentRound, MetricKind, MetricSeries, PhaseLabel, PhaseSchedule, TenantId
from .errors import MalformedRow, MissingSeries, UnknownMetricKind

CSV_HEADER = ("timestamp_s", "tenant", "metric", "value", "phase")

# Prometheus metric name -> (metric family, cumulative counter?)
DEFAULT_METRIC_MAP: dict[str, tuple[MetricKind, bool]] = {
    "container_cpu_usage_seconds_total": (MetricKind.CPU_USAGE, True),
    "container_memory_working_set_bytes": (MetricKind.MEMORY_WORKING_SET, False),
    "container_fs_reads_bytes_total": (MetricKind.DISK_IO, True),
    "container_fs_writes_bytes_total": (MetricKind.DISK_IO, True),
    "container_network_receive_bytes_total": (MetricKind.NETWORK_THROUGHPUT, True),
    "container_network_transmit_bytes_total": (MetricKind.NETWORK_THROUGHPUT, True),
}


@dataclass(frozen=True)
class PrometheusMapping:
    """How matrix entries map onto tenants and metric families."""

    tenant_label: str = "namespace"
    metric_map: dict[str, tuple[MetricKind, bool]] = field(
        default_factory=lambda: dict(DEFAULT_METRIC_MAP)
    )


@dataclass(frozen=True)
class PrometheusIngestReport:
    """What the matrix parser skipped or repaired."""

    counter_resets: dict[tuple[TenantId, MetricKind], int]
    skipped_entries: int
    unmapped_names: tuple[str, ...]


def parse_csv(
    path: str | Path,
    schedule: PhaseSchedule | None = None,
    round_id: int = 1,
) -> ExperimentRound:
    """Read one round from a long CSV.

    Expected header: timestamp_s,tenant,metric,value with an optional
    trailing phase column. Without the phase column, labels come from
    the schedule (default layout when omitted) by offset from the first
    timestamp. Structural problems raise MalformedRow with the 1-based
    line number; an unknown metric code raises UnknownMetricKind; a
    tenant observed on only some metrics raises MissingSeries.
    """
    path = Path(path)
    by_key: dict[tuple[TenantId, MetricKind], list[tuple[float, float, str | None]]] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingSeries(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if header not in (list(CSV_HEADER[:4]), list(CSV_HEADER)):
            raise MalformedRow(1, f"unexpected header {header!r}")
        has_phase = len(header) == 5
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedRow(line_no, f"expected {len(header)} fields, got {len(row)}")
            ts_str, tenant, metric_code, value_str = (f.strip() for f in row[:4])
            if not tenant:
                raise MalformedRow(line_no, "empty tenant id")
            try:
                ts = float(ts_str)
                value = float(value_str)
            except ValueError as exc:
                raise MalformedRow(line_no, f"bad number: {exc}") from None
            try:
                metric = MetricKind(metric_code)
            except ValueError:
                raise UnknownMetricKind(
                    f"line {line_no}: metric {metric_code!r} not one of "
                    f"{[m.value for m in MetricKind]}"
                ) from None
            phase: str | None = None
            if has_phase:
                phase = row[4].strip()
                try:
                    PhaseLabel(phase)
                except ValueError:
                    raise MalformedRow(line_no, f"unknown phase {phase!r}") from None
            by_key.setdefault((tenant, metric), []).append((ts, value, phase))
    if not by_key:
        raise MissingSeries(f"{path}: no data rows")

    tenants = sorted({t for t, _ in by_key})
    metrics = sorted({m for _, m in by_key}, key=lambda m: m.value)
    for t in tenants:
        for m in metrics:
            if (t, m) not in by_key:
                raise MissingSeries(f"{path}: no rows for tenant {t!r} metric {m.value!r}")

    sched = schedule or PhaseSchedule.default()
    series: dict[tuple[TenantId, MetricKind], MetricSeries] = {}
    for key, rows in by_key.items():
        rows.sort(key=lambda r: r[0])
        ts = np.array([r[0] for r in rows])
        vals = np.array([r[1] for r in rows])
        if has_phase:
            phases = np.array([r[2] for r in rows])
        else:
            phases = sched.labels_for(ts)
        series[key] = MetricSeries(
            tenant=key[0], metric=key[1], timestamps=ts, values=vals, phases=phases
        )
    return ExperimentRound(round_id=round_id, series=series)


def write_csv(round_: ExperimentRound, path: str | Path) -> None:
    """Write the canonical long CSV (with phase column) for one round.

    Rows are ordered by tenant, metric, then time, and floats use their
    shortest round-trip form, so equal rounds serialize byte-identically.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for key in sorted(round_.series, key=lambda k: (k[0], k[1].value)):
            s = round_.series[key]
            for ts, value, phase in zip(s.timestamps, s.values, s.phases):
                writer.writerow([repr(float(ts)), s.tenant, s.metric.value,
                                 repr(float(value)), str(phase)])


def parse_prometheus_matrix(
    path: str | Path,
    mapping: PrometheusMapping | None = None,
    schedule: PhaseSchedule | None = None,
    round_id: int = 1,
) -> tuple[ExperimentRound, PrometheusIngestReport]:
    """Read one round from a Prometheus range-query matrix result.

    Cumulative counters become rates by first differences over the
    timestep; a counter going backwards (reset) yields a clamped zero
    rate and is tallied in the report. Entries that map to the same
    tenant and family (e.g. read and write byte counters) are summed.
    Since differencing drops the first sample, gauge series lose theirs
    too whenever any counter is present, keeping one shared grid.
    """
    mapping = mapping or PrometheusMapping()
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise MalformedRow(exc.lineno, f"invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("status") != "success":
        raise MalformedRow(0, "matrix document status is not 'success'")
    data = doc.get("data") or {}
    if data.get("resultType") != "matrix":
        raise MalformedRow(0, f"resultType {data.get('resultType')!r} is not 'matrix'")
    result = data.get("result")
    if not isinstance(result, list):
        raise MalformedRow(0, "data.result is not a list")

    collected: dict[tuple[TenantId, MetricKind], list[tuple[np.ndarray, np.ndarray, bool]]] = {}
    unmapped: set[str] = set()
    skipped = 0
    for i, entry in enumerate(result):
        labels = entry.get("metric") or {}
        name = labels.get("__name__", "")
        tenant = labels.get(mapping.tenant_label)
        if name not in mapping.metric_map:
            unmapped.add(name)
            skipped += 1
            continue
        if not tenant:
            skipped += 1
            continue
        pairs = entry.get("values")
        if not pairs:
            raise MalformedRow(0, f"result[{i}] has no values")
        try:
            ts = np.array([float(p[0]) for p in pairs])
            vals = np.array([float(p[1]) for p in pairs])
        except (TypeError, ValueError, IndexError) as exc:
            raise MalformedRow(0, f"result[{i}]: bad sample pair ({exc})") from None
        kind, is_counter = mapping.metric_map[name]
        collected.setdefault((tenant, kind), []).append((ts, vals, is_counter))

    if not collected:
        raise MissingSeries(f"{path}: no usable matrix entries")

    any_counter = any(c for entries in collected.values() for _, _, c in entries)
    resets: dict[tuple[TenantId, MetricKind], int] = {}
    merged: dict[tuple[TenantId, MetricKind], tuple[np.ndarray, np.ndarray]] = {}
    for key, entries in collected.items():
        ref_ts = entries[0][0]
        total = None
        for ts, vals, is_counter in entries:
            if ts.shape != ref_ts.shape or not np.array_equal(ts, ref_ts):
                raise MalformedRow(0, f"entries for {key} disagree on timestamps")
            if is_counter:
                if ts.shape[0] < 2:
                    raise MissingSeries(f"counter series for {key} has < 2 samples")
                steps = np.diff(ts)
                rate = np.diff(vals) / steps
                negative = rate < 0.0
                if np.any(negative):
                    resets[key] = resets.get(key, 0) + int(negative.sum())
                    rate = np.where(negative, 0.0, rate)
                out_ts, out_vals = ts[1:], rate
            else:
                out_ts, out_vals = (ts[1:], vals[1:]) if any_counter else (ts, vals)
            total = out_vals if total is None else total + out_vals
        merged[key] = (ref_ts[1:] if any_counter else ref_ts, total)

    tenants = sorted({t for t, _ in merged})
    metrics = sorted({m for _, m in merged}, key=lambda m: m.value)
    for t in tenants:
        for m in metrics:
            if (t, m) not in merged:
                raise MissingSeries(f"{path}: no entries for tenant {t!r} metric {m.value!r}")

    sched = schedule or PhaseSchedule.default()
    series = {}
    for key, (ts, vals) in merged.items():
        series[key] = MetricSeries(
            tenant=key[0], metric=key[1], timestamps=ts, values=vals,
            phases=sched.labels_for(ts),
        )
    round_ = ExperimentRound(round_id=round_id, series=series)
    report = PrometheusIngestReport(
        counter_resets=resets,
        skipped_entries=skipped,
        unmapped_names=tuple(sorted(n for n in unmapped if n)),
    )
    return round_, report
