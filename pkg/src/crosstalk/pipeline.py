"""Whole-run analysis: per-round stages and the cross-round reduction.

Each round is processed independently (impacts, shape signatures,
coupling, stationarity screening, causal graphs per phase); rounds may
run concurrently. The reduction then aggregates impacts with their
cross-round CV, replication records per phase, and link-density deltas
against the baseline phase, and assembles the summary document.

Writers emit deterministic files: rows are canonically sorted and
floats use their shortest round-trip form, so re-running the same
analysis yields byte-identical data outputs.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .causality import (
    CausalGraph,
    ReplicationRecord,
    build_graph,
    replication,
)
from .core import (
    ExperimentRound,
    MetricKind,
    PhaseLabel,
    TenantId,
    phase_run_order,
    slice_phase,
)
from .errors import (
    ConstantSeries,
    DegenerateBaseline,
    DegenerateMean,
    InsufficientSamples,
    PhaseAbsent,
    SingularRegression,
    ZeroVariance,
)
from .stats import (
    ImpactRecord,
    SignatureClass,
    SignatureFeatures,
    classify,
    coefficient_of_variation,
    cohens_d,
    coupling_index,
    ecdf,
    pct_change,
    phase_stats,
    signature_features,
)
from .stationarity import StationarizedSeries, stationarize

DEFAULT_ALPHA = 0.05
DEFAULT_MAX_LAG = 10
SUMMARY_SCHEMA_VERSION = 1

NodeId = tuple[TenantId, MetricKind]


@dataclass(frozen=True)
class RoundImpact:
    """Stage-1 numbers for one series in one phase of one round."""

    tenant: TenantId
    metric: MetricKind
    phase: PhaseLabel
    baseline_mean: float
    baseline_std: float
    phase_mean: float
    phase_std: float
    pct_change: float
    cohens_d: float


@dataclass(frozen=True)
class SignatureRecord:
    """Stage-2 shape features and verdict for one series in one phase."""

    tenant: TenantId
    metric: MetricKind
    phase: PhaseLabel
    features: SignatureFeatures
    label: SignatureClass


@dataclass(frozen=True)
class CouplingRecord:
    """Symmetric co-movement score of one tenant pair on one metric."""

    tenant_a: TenantId
    tenant_b: TenantId
    metric: MetricKind
    phase: PhaseLabel
    value: float


@dataclass(frozen=True)
class AdfDiagnostic:
    """Stationarity screening outcome for one series in one phase."""

    tenant: TenantId
    metric: MetricKind
    phase: PhaseLabel
    statistic: float
    lag: int
    difference_order: int
    stationary: bool


@dataclass(frozen=True)
class RoundAnalysis:
    """Everything the per-round stages produce for one round."""

    round_id: int
    phases: tuple[PhaseLabel, ...]
    impacts: tuple[RoundImpact, ...]
    signatures: tuple[SignatureRecord, ...]
    couplings: tuple[CouplingRecord, ...]
    adf: tuple[AdfDiagnostic, ...]
    graphs: dict[PhaseLabel, CausalGraph]
    skips: tuple[tuple[str, str, str, str], ...]  # (stage, tenant, metric/pair, reason)


@dataclass(frozen=True)
class Analysis:
    """Cross-round reduction over a set of analyzed rounds."""

    alpha: float
    max_lag: int
    rounds: tuple[RoundAnalysis, ...]
    impacts: tuple[ImpactRecord, ...]
    replication: dict[PhaseLabel, tuple[ReplicationRecord, ...]]
    summary: dict

    @property
    def round_count(self) -> int:
        return len(self.rounds)


def analyze_round(
    round_: ExperimentRound,
    alpha: float = DEFAULT_ALPHA,
    max_lag: int = DEFAULT_MAX_LAG,
    trim: int = 0,
    adf_alpha: float = DEFAULT_ALPHA,
) -> RoundAnalysis:
    """Run the per-round stages on one round.

    Impacts and signatures compare every non-baseline phase against the
    baseline phase; coupling is scored per metric per tenant pair per
    phase; every series is stationarity-screened once per phase and the
    screened slices are reused by the causal graphs. alpha governs link
    significance; the stationarity screen has its own level because its
    verdict comes from a fixed three-level critical-value table.
    """
    ref = next(iter(round_.series.values()))
    phases = phase_run_order(ref.phases)
    if PhaseLabel.BASELINE not in phases:
        raise PhaseAbsent("round has no baseline phase to compare against")

    nodes = sorted(round_.series, key=lambda k: (k[0], k[1].value))
    skips: list[tuple[str, str, str, str]] = []

    base_values = {
        node: slice_phase(round_.series[node], PhaseLabel.BASELINE, trim=trim).values
        for node in nodes
    }
    base_stats = {node: phase_stats(base_values[node]) for node in nodes}

    impacts: list[RoundImpact] = []
    signatures: list[SignatureRecord] = []
    for phase in phases:
        if phase is PhaseLabel.BASELINE:
            continue
        for node in nodes:
            tenant, metric = node
            values = slice_phase(round_.series[node], phase, trim=trim).values
            stats = phase_stats(values)
            try:
                pct = pct_change(base_stats[node], stats)
                d = cohens_d(base_stats[node], stats)
            except (DegenerateBaseline, ZeroVariance) as exc:
                skips.append(("impact", tenant, metric.value, exc.__class__.__name__))
                continue
            impacts.append(
                RoundImpact(
                    tenant=tenant,
                    metric=metric,
                    phase=phase,
                    baseline_mean=base_stats[node].mean,
                    baseline_std=base_stats[node].std,
                    phase_mean=stats.mean,
                    phase_std=stats.std,
                    pct_change=pct,
                    cohens_d=d,
                )
            )
            try:
                feats = signature_features(base_values[node], values)
            except DegenerateBaseline as exc:
                skips.append(("signature", tenant, metric.value, exc.__class__.__name__))
                continue
            signatures.append(
                SignatureRecord(
                    tenant=tenant,
                    metric=metric,
                    phase=phase,
                    features=feats,
                    label=classify(feats),
                )
            )

    couplings: list[CouplingRecord] = []
    tenants = round_.tenants
    metrics = sorted({m for _, m in nodes}, key=lambda m: m.value)
    for phase in phases:
        for metric in metrics:
            for i, ta in enumerate(tenants):
                for tb in tenants[i + 1:]:
                    try:
                        value = coupling_index(
                            round_.series[(ta, metric)],
                            round_.series[(tb, metric)],
                            phase,
                            trim=trim,
                        )
                    except (ConstantSeries, InsufficientSamples) as exc:
                        skips.append(
                            ("coupling", f"{ta}~{tb}", metric.value, exc.__class__.__name__)
                        )
                        continue
                    couplings.append(
                        CouplingRecord(
                            tenant_a=ta,
                            tenant_b=tb,
                            metric=metric,
                            phase=phase,
                            value=value,
                        )
                    )

    adf_rows: list[AdfDiagnostic] = []
    graphs: dict[PhaseLabel, CausalGraph] = {}
    for phase in phases:
        screened: dict[NodeId, StationarizedSeries] = {}
        for node in nodes:
            try:
                st = stationarize(round_.series[node], phase, alpha=adf_alpha, trim=trim)
            except (ConstantSeries, InsufficientSamples, SingularRegression) as exc:
                skips.append(("adf", node[0], node[1].value, exc.__class__.__name__))
                continue
            screened[node] = st
            adf_rows.append(
                AdfDiagnostic(
                    tenant=node[0],
                    metric=node[1],
                    phase=phase,
                    statistic=st.adf.statistic,
                    lag=st.adf.lag,
                    difference_order=st.difference_order,
                    stationary=not st.non_stationary,
                )
            )
        graphs[phase] = build_graph(
            round_,
            phase,
            alpha=alpha,
            max_lag=max_lag,
            trim=trim,
            adf_alpha=adf_alpha,
            stationarized=screened,
        )

    return RoundAnalysis(
        round_id=round_.round_id,
        phases=phases,
        impacts=tuple(impacts),
        signatures=tuple(signatures),
        couplings=tuple(couplings),
        adf=tuple(adf_rows),
        graphs=graphs,
        skips=tuple(skips),
    )


def analyze_rounds(
    rounds: Sequence[ExperimentRound],
    alpha: float = DEFAULT_ALPHA,
    max_lag: int = DEFAULT_MAX_LAG,
    trim: int = 0,
    adf_alpha: float = DEFAULT_ALPHA,
    max_workers: int | None = None,
) -> Analysis:
    """Analyze every round concurrently, then reduce across rounds."""
    if not rounds:
        raise InsufficientSamples("no rounds to analyze")

    def one(r: ExperimentRound) -> RoundAnalysis:
        return analyze_round(
            r, alpha=alpha, max_lag=max_lag, trim=trim, adf_alpha=adf_alpha
        )

    workers = max_workers or min(len(rounds), os.cpu_count() or 1)
    if workers > 1 and len(rounds) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            analyzed = list(pool.map(one, rounds))
    else:
        analyzed = [one(r) for r in rounds]
    analyzed.sort(key=lambda a: a.round_id)
    return reduce_rounds(analyzed, alpha=alpha, max_lag=max_lag)


def _aggregate_impacts(analyzed: Sequence[RoundAnalysis]) -> tuple[ImpactRecord, ...]:
    per_key: dict[tuple[TenantId, MetricKind, PhaseLabel], list[RoundImpact]] = {}
    for a in analyzed:
        for imp in a.impacts:
            per_key.setdefault((imp.tenant, imp.metric, imp.phase), []).append(imp)
    records = []
    for (tenant, metric, phase), imps in sorted(
        per_key.items(), key=lambda kv: (kv[0][2].value, kv[0][0], kv[0][1].value)
    ):
        pcts = np.array([i.pct_change for i in imps])
        ds = np.array([i.cohens_d for i in imps])
        cv: float | None = None
        if len(imps) >= 2:
            try:
                cv = coefficient_of_variation(pcts)
            except DegenerateMean:
                cv = None
        records.append(
            ImpactRecord(
                tenant=tenant,
                metric=metric,
                phase=phase,
                pct_change=float(pcts.mean()),
                cohens_d=float(ds.mean()),
                cv=cv,
            )
        )
    return tuple(records)


def reduce_rounds(
    analyzed: Sequence[RoundAnalysis],
    alpha: float = DEFAULT_ALPHA,
    max_lag: int = DEFAULT_MAX_LAG,
) -> Analysis:
    """Stage-4 reduction: aggregate impacts, replication, and summary."""
    analyzed = sorted(analyzed, key=lambda a: a.round_id)
    impacts = _aggregate_impacts(analyzed)

    phases = analyzed[0].phases
    repl: dict[PhaseLabel, tuple[ReplicationRecord, ...]] = {}
    if len(analyzed) >= 2:
        for phase in phases:
            graphs = [a.graphs[phase] for a in analyzed if phase in a.graphs]
            repl[phase] = tuple(replication(graphs))

    summary = _build_summary(analyzed, impacts, repl, alpha, max_lag)
    return Analysis(
        alpha=alpha,
        max_lag=max_lag,
        rounds=tuple(analyzed),
        impacts=impacts,
        replication=repl,
        summary=summary,
    )


def _build_summary(
    analyzed: Sequence[RoundAnalysis],
    impacts: tuple[ImpactRecord, ...],
    repl: dict[PhaseLabel, tuple[ReplicationRecord, ...]],
    alpha: float,
    max_lag: int,
) -> dict:
    phases = analyzed[0].phases
    baseline = PhaseLabel.BASELINE

    link_counts = {
        p.value: [a.graphs[p].link_count for a in analyzed if p in a.graphs]
        for p in phases
    }
    density_delta: dict[str, float | None] = {}
    for p in phases:
        if p is baseline:
            continue
        deltas = []
        for a in analyzed:
            nb = a.graphs[baseline].link_count
            if nb == 0:
                continue
            deltas.append(100.0 * (a.graphs[p].link_count - nb) / nb)
        density_delta[p.value] = float(np.mean(deltas)) if deltas else None

    out_degree: dict[str, dict[str, float]] = {}
    for p in phases:
        per_tenant: dict[str, list[int]] = {}
        for a in analyzed:
            for tenant, deg in a.graphs[p].out_degree.items():
                per_tenant.setdefault(tenant, []).append(deg)
        out_degree[p.value] = {
            t: float(np.mean(v)) for t, v in sorted(per_tenant.items())
        }

    signature_counts: dict[str, dict[str, dict[str, int]]] = {}
    for a in analyzed:
        for rec in a.signatures:
            per_phase = signature_counts.setdefault(rec.phase.value, {})
            key = f"{rec.tenant}/{rec.metric.value}"
            per_series = per_phase.setdefault(key, {})
            per_series[rec.label.value] = per_series.get(rec.label.value, 0) + 1

    adf_total = sum(len(a.adf) for a in analyzed)
    adf_stationary = sum(1 for a in analyzed for row in a.adf if row.stationary)

    repl_json = {
        p.value: [
            {
                "source": [r.source[0], r.source[1].value],
                "target": [r.target[0], r.target[1].value],
                "rounds_significant": r.rounds_significant,
                "rounds_tested": r.rounds_tested,
                "frequency": r.frequency,
                "mean_p": r.mean_p,
                "std_p": r.std_p,
            }
            for r in records
        ]
        for p, records in repl.items()
    }

    return {
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "tool_version": __version__,
        "alpha": alpha,
        "max_lag": max_lag,
        "rounds": len(analyzed),
        "insufficient_rounds": len(analyzed) < 2,
        "phases": [p.value for p in phases],
        "link_counts": link_counts,
        "mean_link_count": {
            p: float(np.mean(v)) if v else None for p, v in link_counts.items()
        },
        "density_delta_vs_baseline_pct": density_delta,
        "mean_out_degree_by_tenant": out_degree,
        "impacts": [
            {
                "tenant": r.tenant,
                "metric": r.metric.value,
                "phase": r.phase.value,
                "pct_change": r.pct_change,
                "cohens_d": r.cohens_d,
                "cv": r.cv,
            }
            for r in impacts
        ],
        "replication": repl_json,
        "signatures": signature_counts,
        "stationarity": {
            "checks": adf_total,
            "stationary": adf_stationary,
            "fraction": (adf_stationary / adf_total) if adf_total else None,
        },
        "skips": sum(len(a.skips) for a in analyzed),
    }


# ---------------------------------------------------------------- writers


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_json_atomic(obj: dict, path: Path) -> None:
    """Serialize with sorted keys and swap into place atomically."""
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def config_digest(config_dict: dict) -> str:
    """Stable content hash of a JSON-serializable configuration."""
    canon = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def write_manifest(
    out_dir: Path,
    command: str,
    config_hash: str,
    seed: int | None,
    inputs: Sequence[str],
    outputs: Sequence[str],
) -> None:
    """Record what produced this output set, atomically."""
    write_json_atomic(
        {
            "command": command,
            "config_hash": config_hash,
            "seed": seed,
            "inputs": sorted(str(p) for p in inputs),
            "outputs": sorted(str(p) for p in outputs),
            "tool_version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        },
        out_dir / "manifest.json",
    )


def _graph_json(graph: CausalGraph) -> dict:
    def result_row(r) -> dict:
        return {
            "source": [r.source[0], r.source[1].value],
            "target": [r.target[0], r.target[1].value],
            "lag": r.lag,
            "f_stat": r.f_stat,
            "p_value": r.p_value,
            "n_effective": r.n_effective,
        }

    return {
        "phase": graph.phase.value,
        "round": graph.round_id,
        "alpha": graph.alpha,
        "max_lag": graph.max_lag,
        "nodes": [[t, m.value] for t, m in graph.nodes],
        "links": [result_row(r) for r in graph.links],
        "results": [result_row(r) for r in graph.results],
        "out_degree": dict(sorted(graph.out_degree.items())),
        "in_degree": dict(sorted(graph.in_degree.items())),
        "diagnostics": {
            "excluded_nodes": [
                [t, m.value, why] for (t, m), why in graph.diagnostics.excluded_nodes
            ],
            "skipped_pairs": [
                [s[0], s[1].value, d[0], d[1].value, why]
                for s, d, why in graph.diagnostics.skipped_pairs
            ],
            "stationary_nodes": graph.diagnostics.stationary_nodes,
            "total_nodes": graph.diagnostics.total_nodes,
        },
    }


def _write_graph_files(graph: CausalGraph, round_dir: Path) -> list[Path]:
    stem = f"graph_{graph.phase.value}"
    paths = []

    json_path = round_dir / f"{stem}.json"
    write_json_atomic(_graph_json(graph), json_path)
    paths.append(json_path)

    edges_path = round_dir / f"{stem}_edges.csv"
    _write_rows(
        edges_path,
        ["src_tenant", "src_metric", "dst_tenant", "dst_metric", "phase", "lag", "F", "p"],
        [
            [
                r.source[0], r.source[1].value,
                r.target[0], r.target[1].value,
                graph.phase.value, r.lag, _fmt(r.f_stat), _fmt(r.p_value),
            ]
            for r in sorted(graph.links, key=lambda r: (r.source, r.target))
        ],
    )
    paths.append(edges_path)

    adj_path = round_dir / f"{stem}_adjacency.csv"
    labels = [f"{t}/{m.value}" for t, m in graph.nodes]
    index = {node: i for i, node in enumerate(graph.nodes)}
    matrix = np.zeros((len(labels), len(labels)), dtype=int)
    for r in graph.links:
        matrix[index[r.source], index[r.target]] = 1
    _write_rows(
        adj_path,
        ["node", *labels],
        [[labels[i], *matrix[i]] for i in range(len(labels))],
    )
    paths.append(adj_path)
    return paths


def _write_round(
    a: RoundAnalysis, round_: ExperimentRound, round_dir: Path
) -> list[Path]:
    round_dir.mkdir(parents=True, exist_ok=True)
    paths = []

    p = round_dir / "impacts.csv"
    _write_rows(
        p,
        ["tenant", "metric", "phase", "baseline_mean", "baseline_std",
         "phase_mean", "phase_std", "pct_change", "cohens_d"],
        [
            [i.tenant, i.metric.value, i.phase.value,
             _fmt(i.baseline_mean), _fmt(i.baseline_std),
             _fmt(i.phase_mean), _fmt(i.phase_std),
             _fmt(i.pct_change), _fmt(i.cohens_d)]
            for i in a.impacts
        ],
    )
    paths.append(p)

    p = round_dir / "adf.csv"
    _write_rows(
        p,
        ["tenant", "metric", "phase", "adf_stat", "lag", "difference_order", "stationary"],
        [
            [r.tenant, r.metric.value, r.phase.value,
             _fmt(r.statistic), r.lag, r.difference_order, str(r.stationary).lower()]
            for r in a.adf
        ],
    )
    paths.append(p)

    p = round_dir / "signatures.csv"
    _write_rows(
        p,
        ["tenant", "metric", "phase", "median_shift_pct", "tail_flatness",
         "step_height", "step_sharpness", "label"],
        [
            [r.tenant, r.metric.value, r.phase.value,
             _fmt(r.features.median_shift_pct), _fmt(r.features.tail_flatness),
             _fmt(r.features.step_height), _fmt(r.features.step_sharpness),
             r.label.value]
            for r in a.signatures
        ],
    )
    paths.append(p)

    p = round_dir / "coupling.csv"
    _write_rows(
        p,
        ["phase", "metric", "tenant_a", "tenant_b", "value"],
        [
            [r.phase.value, r.metric.value, r.tenant_a, r.tenant_b, _fmt(r.value)]
            for r in a.couplings
        ],
    )
    paths.append(p)

    p = round_dir / "ecdf.csv"
    rows = []
    nodes = sorted(round_.series, key=lambda k: (k[0], k[1].value))
    for phase in a.phases:
        for node in nodes:
            curve = ecdf(slice_phase(round_.series[node], phase).values)
            for x, prob in zip(*curve.as_columns()):
                rows.append([node[0], node[1].value, phase.value, _fmt(x), _fmt(prob)])
    _write_rows(p, ["tenant", "metric", "phase", "x", "F"], rows)
    paths.append(p)

    for phase in a.phases:
        paths.extend(_write_graph_files(a.graphs[phase], round_dir))
    return paths


def write_analysis(
    analysis: Analysis,
    rounds: Sequence[ExperimentRound],
    out_dir: str | Path,
    inputs: Sequence[str] = (),
) -> list[Path]:
    """Write the full output tree; returns every path written.

    Layout: aggregated impacts and replication at the top, one
    subdirectory per round with its per-round tables and graphs, then
    summary.json and a manifest naming everything.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    by_id = {r.round_id: r for r in rounds}
    paths: list[Path] = []

    p = out / "impacts.csv"
    _write_rows(
        p,
        ["tenant", "metric", "phase", "pct_change", "cohens_d", "cv"],
        [
            [r.tenant, r.metric.value, r.phase.value,
             _fmt(r.pct_change), _fmt(r.cohens_d),
             "" if r.cv is None else _fmt(r.cv)]
            for r in analysis.impacts
        ],
    )
    paths.append(p)

    p = out / "replication.csv"
    repl_rows = []
    for phase in sorted(analysis.replication, key=lambda p: p.value):
        for r in analysis.replication[phase]:
            repl_rows.append(
                [phase.value, r.source[0], r.source[1].value,
                 r.target[0], r.target[1].value,
                 r.rounds_significant, r.rounds_tested, r.frequency,
                 _fmt(r.mean_p), _fmt(r.std_p)]
            )
    _write_rows(
        p,
        ["phase", "src_tenant", "src_metric", "dst_tenant", "dst_metric",
         "rounds_significant", "rounds_tested", "frequency", "mean_p", "std_p"],
        repl_rows,
    )
    paths.append(p)

    for a in analysis.rounds:
        round_dir = out / "rounds" / f"round_{a.round_id:02d}"
        paths.extend(_write_round(a, by_id[a.round_id], round_dir))

    p = out / "summary.json"
    write_json_atomic(analysis.summary, p)
    paths.append(p)

    digest = config_digest(
        {
            "alpha": analysis.alpha,
            "max_lag": analysis.max_lag,
            "rounds": [a.round_id for a in analysis.rounds],
            "inputs": sorted(str(i) for i in inputs),
        }
    )
    write_manifest(
        out,
        command="analyze",
        config_hash=digest,
        seed=None,
        inputs=[str(i) for i in inputs],
        outputs=[str(p.relative_to(out)) for p in paths],
    )
    paths.append(out / "manifest.json")
    return paths


# ----------------------------------------------------------- verification


@dataclass(frozen=True)
class PhaseRecovery:
    """Ground-truth recovery scores of one phase, pooled over rounds."""

    phase: str
    injected: int
    tpr: float | None
    fpr: float | None


@dataclass(frozen=True)
class AsymmetryRow:
    """Round counts for one planted aggressor->victim link."""

    phase: str
    source: list[str]
    target: list[str]
    forward_significant: int
    reverse_clean: int
    rounds: int

    def holds(self) -> bool:
        need_fwd = -(-9 * self.rounds // 10)   # ceil(0.9 R)
        need_rev = -(-8 * self.rounds // 10)   # ceil(0.8 R)
        return (
            self.forward_significant >= need_fwd
            and self.reverse_clean >= need_rev
        )


@dataclass(frozen=True)
class VerifyReport:
    """Recovery and asymmetry checks of one analysis run."""

    recovery: tuple[PhaseRecovery, ...]
    asymmetry: tuple[AsymmetryRow, ...]
    tpr_min: float
    fpr_max: float

    @property
    def passed(self) -> bool:
        for rec in self.recovery:
            if rec.tpr is not None and rec.tpr < self.tpr_min:
                return False
            if rec.fpr is not None and rec.fpr > self.fpr_max:
                return False
        return all(row.holds() for row in self.asymmetry)

    def lines(self) -> list[str]:
        out = ["phase            injected  TPR      FPR"]
        for r in self.recovery:
            tpr = "   -  " if r.tpr is None else f"{r.tpr:.4f}"
            fpr = "   -  " if r.fpr is None else f"{r.fpr:.4f}"
            out.append(f"{r.phase:<16} {r.injected:>8}  {tpr}  {fpr}")
        out.append("")
        out.append("aggressor link asymmetry (forward significant / reverse clean):")
        for row in self.asymmetry:
            verdict = "ok" if row.holds() else "FAIL"
            out.append(
                f"  {row.phase:<15} {row.source[0]}/{row.source[1]}"
                f" -> {row.target[0]}/{row.target[1]}:"
                f" fwd={row.forward_significant}/{row.rounds}"
                f" rev={row.reverse_clean}/{row.rounds} {verdict}"
            )
        out.append("")
        out.append(f"verdict: {'PASS' if self.passed else 'FAIL'}")
        return out


def _truth_links_by_phase(truth: dict) -> dict[str, set[tuple[tuple, tuple]]]:
    background = {
        (tuple(l["source"]), tuple(l["target"]))
        for l in truth.get("background_links", [])
    }
    links: dict[str, set[tuple[tuple, tuple]]] = {}
    for phase_entry in truth["schedule"]:
        phase = phase_entry[0]
        pairs = set(background)
        for l in truth.get("links", {}).get(phase, []):
            pairs.add((tuple(l["source"]), tuple(l["target"])))
        links[phase] = pairs
    return links


def _aggressor_tenants(truth: dict) -> set[str]:
    tenants = set()
    for key, entry in truth.get("series", {}).items():
        if entry.get("active_levels"):
            tenants.add(key.partition("/")[0])
    return tenants


def verify_run(
    analysis_dir: str | Path,
    truth: dict,
    tpr_min: float = 0.90,
    fpr_max: float = 0.10,
) -> VerifyReport:
    """Score recovered links in an analysis tree against planted truth.

    Reads the per-round graph JSON files under rounds/round_*/ and the
    planted-link record, pools detection over rounds per phase, and
    tabulates forward/reverse round counts for every aggressor->victim
    link.
    """
    analysis_dir = Path(analysis_dir)
    round_dirs = sorted((analysis_dir / "rounds").glob("round_*"))
    if not round_dirs:
        raise FileNotFoundError(f"no rounds/round_* directories in {analysis_dir}")

    injected = _truth_links_by_phase(truth)
    aggressors = _aggressor_tenants(truth)
    phases = [e[0] for e in truth["schedule"]]

    per_phase_hits: dict[str, list[int]] = {p: [0, 0, 0, 0] for p in phases}
    # [detected, injected_tested, false_links, clean_tested]
    fwd_counts: dict[tuple, int] = {}
    rev_counts: dict[tuple, int] = {}
    rounds = 0
    for round_dir in round_dirs:
        rounds += 1
        for phase in phases:
            graph_path = round_dir / f"graph_{phase}.json"
            graph = json.loads(graph_path.read_text(encoding="utf-8"))
            planted = injected.get(phase, set())
            sig = {
                (tuple(l["source"]), tuple(l["target"])) for l in graph["links"]
            }
            tested = {
                (tuple(r["source"]), tuple(r["target"])): r["p_value"]
                for r in graph["results"]
            }
            counters = per_phase_hits[phase]
            for pair in tested:
                if pair in planted:
                    counters[1] += 1
                    counters[0] += pair in sig
                else:
                    counters[3] += 1
                    counters[2] += pair in sig
            for src, dst in sorted(planted):
                if src[0] not in aggressors or dst[0] in aggressors:
                    continue
                key = (phase, src, dst)
                fwd_counts.setdefault(key, 0)
                rev_counts.setdefault(key, 0)
                if (src, dst) in sig:
                    fwd_counts[key] += 1
                rev_p = tested.get((dst, src))
                if rev_p is not None and rev_p > 0.10:
                    rev_counts[key] += 1

    recovery = []
    for phase in phases:
        detected, inj_tested, false_links, clean_tested = per_phase_hits[phase]
        recovery.append(
            PhaseRecovery(
                phase=phase,
                injected=len(injected.get(phase, ())),
                tpr=(detected / inj_tested) if inj_tested else None,
                fpr=(false_links / clean_tested) if clean_tested else None,
            )
        )

    asymmetry = [
        AsymmetryRow(
            phase=phase,
            source=list(src),
            target=list(dst),
            forward_significant=fwd_counts[(phase, src, dst)],
            reverse_clean=rev_counts[(phase, src, dst)],
            rounds=rounds,
        )
        for (phase, src, dst) in sorted(fwd_counts)
    ]
    return VerifyReport(
        recovery=tuple(recovery),
        asymmetry=tuple(asymmetry),
        tpr_min=tpr_min,
        fpr_max=fpr_max,
    )
