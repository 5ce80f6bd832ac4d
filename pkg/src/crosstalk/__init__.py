"""Contention analysis for multi-tenant nodes.

Quantifies how a noisy tenant degrades its neighbors: per-phase impact
statistics, distribution-shape signatures, stationarity screening, and
lagged-regression causality graphs with cross-round replication, plus a
calibrated synthetic generator for validating the whole chain against a
known ground truth.
"""

from .core import (
    ExperimentRound,
    MetricKind,
    MetricSeries,
    NOISE_PHASES,
    PhaseLabel,
    PhaseSchedule,
    TenantId,
    align,
    phase_run_order,
    slice_phase,
)
from .errors import (
    ConstantSeries,
    CrosstalkError,
    DegenerateBaseline,
    DegenerateMean,
    EmptyBaselineGraph,
    EmptyIntersection,
    InfeasibleImpact,
    InsufficientSamples,
    InvalidConfig,
    InvalidSeries,
    MalformedRow,
    MissingSeries,
    NonContiguousPhase,
    NonUniformTimestep,
    PhaseAbsent,
    SingularRegression,
    UnknownMetricKind,
    ZeroVariance,
)
from .ingest import (
    PrometheusIngestReport,
    PrometheusMapping,
    parse_csv,
    parse_prometheus_matrix,
    write_csv,
)
from .stats import (
    EcdfCurve,
    ImpactRecord,
    PhaseStats,
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
from .stationarity import (
    AdfResult,
    PValueBand,
    StationarizedSeries,
    adf_test,
    critical_values,
    default_max_lag,
    stationarize,
)
from .causality import (
    BidirectionalResult,
    CausalGraph,
    GrangerResult,
    GraphDiagnostics,
    ReplicationRecord,
    bidirectional_test,
    build_graph,
    f_distribution_cdf,
    f_distribution_sf,
    granger_test,
    graph_density_delta,
    replication,
)
from .simulator import (
    GroundTruthSpec,
    LinkSpec,
    ResponseKind,
    SeriesSpec,
    SimConfig,
    SimResult,
    simulate,
)
from .profiles import (
    config_from_dict,
    config_to_dict,
    default_paper_profile,
    dump_ground_truth,
    load_profile,
)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BACKEND",
    # core
    "ExperimentRound", "MetricKind", "MetricSeries", "NOISE_PHASES",
    "PhaseLabel", "PhaseSchedule", "TenantId", "align", "phase_run_order",
    "slice_phase",
    # errors
    "ConstantSeries", "CrosstalkError", "DegenerateBaseline", "DegenerateMean",
    "EmptyBaselineGraph", "EmptyIntersection", "InfeasibleImpact",
    "InsufficientSamples", "InvalidConfig", "InvalidSeries", "MalformedRow",
    "MissingSeries", "NonContiguousPhase", "NonUniformTimestep", "PhaseAbsent",
    "SingularRegression", "UnknownMetricKind", "ZeroVariance",
    # ingest
    "PrometheusIngestReport", "PrometheusMapping", "parse_csv",
    "parse_prometheus_matrix", "write_csv",
    # stats
    "EcdfCurve", "ImpactRecord", "PhaseStats", "SignatureClass",
    "SignatureFeatures", "SignatureThresholds", "classify",
    "coefficient_of_variation", "cohens_d", "coupling_index", "ecdf",
    "pct_change", "phase_stats", "signature_features",
    # stationarity
    "AdfResult", "PValueBand", "StationarizedSeries", "adf_test",
    "critical_values", "default_max_lag", "stationarize",
    # causality
    "BidirectionalResult", "CausalGraph", "GrangerResult", "GraphDiagnostics",
    "ReplicationRecord", "bidirectional_test", "build_graph",
    "f_distribution_cdf", "f_distribution_sf", "granger_test",
    "graph_density_delta", "replication",
    # simulator
    "GroundTruthSpec", "LinkSpec", "ResponseKind", "SeriesSpec", "SimConfig",
    "SimResult", "simulate",
    # profiles
    "config_from_dict", "config_to_dict", "default_paper_profile",
    "dump_ground_truth", "load_profile",
]
