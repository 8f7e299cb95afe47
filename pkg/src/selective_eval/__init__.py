"""Selective-answering evaluation from logged classifier predictions.

Builds MaxProb coverage-accuracy curves, flags the ways AUC misranks models
(tail disagreement, accuracy fluctuations, high-confidence plateaus) and
computes the DiSCA, DiDMA and NiDMA scores.
"""

from selective_eval.config import RunConfig, load_config
from selective_eval.curve import CurvePoint, RiskCoverageCurve, auc, build_curve, resample
from selective_eval.diagnostics import (
    FluctuationEvent,
    PlateauFinding,
    TailFinding,
    detect_plateau,
    find_fluctuations,
    first_drop,
    tail_compare,
    tolerance_cutoff,
)
from selective_eval.ingest import (
    IngestError,
    PredictionLog,
    PredictionRecord,
    parse_log,
    read_logs,
    validate_pair,
    write_log,
)
from selective_eval.report import ScoreReport, assemble_report, emit_table, rank_models, write_report
from selective_eval.scores import (
    CompositionWeights,
    DiscaBreakdown,
    DiscaWeights,
    EnergyProfile,
    ParamRatio,
    computation_score,
    didma,
    disca,
    disca_sweep,
    nidma,
)
from selective_eval.synth import SynthSpec, generate, generate_table1_pair

__version__ = "0.1.0"

__all__ = [
    "CompositionWeights",
    "CurvePoint",
    "DiscaBreakdown",
    "DiscaWeights",
    "EnergyProfile",
    "FluctuationEvent",
    "IngestError",
    "ParamRatio",
    "PlateauFinding",
    "PredictionLog",
    "PredictionRecord",
    "RiskCoverageCurve",
    "RunConfig",
    "ScoreReport",
    "SynthSpec",
    "TailFinding",
    "assemble_report",
    "auc",
    "build_curve",
    "computation_score",
    "detect_plateau",
    "didma",
    "disca",
    "disca_sweep",
    "emit_table",
    "find_fluctuations",
    "first_drop",
    "generate",
    "generate_table1_pair",
    "load_config",
    "nidma",
    "parse_log",
    "rank_models",
    "read_logs",
    "resample",
    "tail_compare",
    "tolerance_cutoff",
    "validate_pair",
    "write_log",
    "write_report",
]
