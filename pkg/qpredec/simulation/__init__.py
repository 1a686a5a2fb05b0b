"""Shot sampling, predecoder execution and Monte-Carlo experiments."""
from qpredec.simulation.experiment import (
    CSV_COLUMNS,
    DecoderConfig,
    ExperimentReport,
    SweepPoint,
    reports_to_csv,
    reports_to_json,
    run_experiment,
    sub_seed,
    sweep,
    sweep_points,
)
from qpredec.simulation.predecoder import PredecodeOutcome, Predecoder, run_predecoder
from qpredec.simulation.sampling import FaultSampler, MechanismSampler, Shot, sample_shot

__all__ = [
    "CSV_COLUMNS",
    "DecoderConfig",
    "ExperimentReport",
    "FaultSampler",
    "MechanismSampler",
    "PredecodeOutcome",
    "Predecoder",
    "Shot",
    "SweepPoint",
    "reports_to_csv",
    "reports_to_json",
    "run_experiment",
    "run_predecoder",
    "sample_shot",
    "sub_seed",
    "sweep",
    "sweep_points",
]
