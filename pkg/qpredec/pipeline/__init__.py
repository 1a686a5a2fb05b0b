"""Conflict graphs, colouring, pipeline assembly and artifacts."""
from qpredec.pipeline.assembly import (
    CostEstimate,
    Pipeline,
    assemble_pipeline,
    truncate_pipeline,
    validate_pipeline,
)
from qpredec.pipeline.build import BuildReport, compile_pipeline
from qpredec.pipeline.coloring import (
    GREEDY_HEURISTICS,
    Coloring,
    ExactResult,
    exact_color,
    greedy_color,
    hybrid_color,
    is_proper,
)
from qpredec.pipeline.emit import emit_pipeline, load_pipeline, read_pipeline, save_pipeline
from qpredec.pipeline.graph import ConflictGraph, build_conflict_graph

__all__ = [
    "BuildReport",
    "Coloring",
    "ConflictGraph",
    "CostEstimate",
    "ExactResult",
    "GREEDY_HEURISTICS",
    "Pipeline",
    "assemble_pipeline",
    "build_conflict_graph",
    "compile_pipeline",
    "emit_pipeline",
    "exact_color",
    "greedy_color",
    "hybrid_color",
    "is_proper",
    "load_pipeline",
    "read_pipeline",
    "save_pipeline",
    "truncate_pipeline",
    "validate_pipeline",
]
