"""Patent IPC co-occurrence networks, technology fusion and life-cycle forecasting."""

from .cooccur import CooccurrenceGraph, binary_adjacency, build_cooccurrence, export_edges, import_edges
from .corpus import (
    IngestReport,
    PatentCorpus,
    PatentRecord,
    TimeSeries,
    WindowSpec,
    annual_counts,
    load_corpus,
    load_corpus_file,
    slice_windows,
)
from .errors import (
    DegenerateSeries,
    EmptyCorpus,
    EmptySpec,
    InsufficientData,
    IpcFusionError,
    LevelOrderViolation,
    LevelUnavailable,
    MalformedIpc,
    NonConvergence,
    SinkWriteFailure,
    UnreadableSource,
)
from .fusion import FusionTable, degree_of_fusion
from .ipc import IpcCode, IpcLevel, format_ipc, parse_ipc, truncate
from .lifecycle import (
    FitMetrics,
    GrowthFit,
    MaturityAssessment,
    Model,
    Phase,
    fit_gompertz,
    fit_growth,
    fit_logistic,
    forecast,
    goodness_of_fit,
    maturity_phase,
    select_model,
)
from .metrics import (
    CentralityTable,
    Measure,
    Network,
    RankedList,
    betweenness_centrality,
    closeness_centrality,
    clustering_coefficient,
    degree_centrality,
    rank_top,
    weighted_degree,
)
from .report import EvolutionReport, StudyConfig, run_study, window_evolution
from .svg import render_scurve_svg

__version__ = "0.1.0"
