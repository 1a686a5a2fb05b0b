"""End-to-end predecoder construction from a detector error model."""
import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from qpredec.dem.model import DetectorErrorModel, merge_duplicates
from qpredec.pipeline.assembly import Pipeline, assemble_pipeline
from qpredec.pipeline.coloring import DEFAULT_TIMEOUT, hybrid_color, reorder_colors
from qpredec.pipeline.graph import build_conflict_graph
from qpredec.primitives import (
    class_table,
    classify,
    generate_primitives,
    prioritize,
    prune_composites,
    prune_round_offsets,
)

logger = logging.getLogger(__name__)


@dataclass
class ClassColoringReport:
    primitive_class: str
    nodes: int
    edges: int
    omega_lb: int
    colors: int
    method: str


@dataclass
class BuildReport:
    """Counts of every step of the build flow.

    ``generated == retained + round_pruned + composite_pruned`` always holds.
    """
    mechanisms: int
    merged_away: int
    generated: int
    round_pruned: int
    composite_pruned: int
    composite_skipped: int
    retained: int
    flagged: int
    depth: int
    classes: List[dict] = field(default_factory=list)
    colorings: List[ClassColoringReport] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def format(self) -> str:
        lines = [
            f"mechanisms: {self.mechanisms} ({self.merged_away} merged away)",
            f"primitives: generated {self.generated}, round-pruned {self.round_pruned}, "
            f"composite-pruned {self.composite_pruned}, retained {self.retained}",
        ]
        if self.flagged:
            lines.append(f"primitives beyond the two-round window: {self.flagged}")
        if self.composite_skipped:
            lines.append(f"composite searches skipped: {self.composite_skipped}")
        lines.append(f"{'class':<15}{'count':>7}{'avg p':>13}{'nodes':>7}{'edges':>7}"
                     f"{'omega':>7}{'colors':>8}  method")
        coloring_of = {c.primitive_class: c for c in self.colorings}
        for row in self.classes:
            c = coloring_of[row["primitive_class"]]
            lines.append(
                f"{row['primitive_class']:<15}{row['count']:>7}{row['average_probability']:>13.4e}"
                f"{c.nodes:>7}{c.edges:>7}{c.omega_lb:>7}{c.colors:>8}  {c.method}"
            )
        lines.append(f"depth: {self.depth}")
        lines.extend(f"note: {note}" for note in self.notes)
        return "\n".join(lines)


def compile_pipeline(
    dem: DetectorErrorModel,
    timeout: float = DEFAULT_TIMEOUT,
    sidecar: Optional[Mapping[int, str]] = None,
    unanimous: bool = True,
    seed: int = 0,
    code: str = "",
    source: Optional[dict] = None,
) -> Tuple[Pipeline, BuildReport]:
    """Build a predecoder pipeline.

    Runs merge, generation, round-offset and composite pruning, classification,
    ranking, per-class hybrid colouring and assembly.

    Parameters
    ----------
    dem : DetectorErrorModel
    timeout : float, default=60.
        Exact-colouring budget per class, in seconds.
    sidecar : mapping of int to str, optional
        Mechanism kinds by source id, for hook classification.
    unanimous : bool, default=True
        Composite pruning rule, see :func:`prune_composites`.
    seed : int, default=0
        Seed of the random-sequential colouring heuristic.
    code : str, default=""
        Label stored in the pipeline.
    source : dict, optional
        Input description stored in the pipeline.

    Returns
    -------
    pipeline : Pipeline
    report : BuildReport

    Raises
    ------
    ValueError
        If the model has no mechanisms.
    """
    normalized = merge_duplicates(dem)
    if not normalized.mechanisms:
        raise ValueError("no mechanisms: the detector error model is empty.")

    primitives = generate_primitives(normalized)
    primitives = prune_round_offsets(primitives, normalized)
    after_rounds = len(primitives)
    primitives = prune_composites(primitives, unanimous=unanimous)
    primitives = prioritize(classify(primitives, normalized, sidecar))

    lattice = normalized.lattice() if primitives.round_pruned else None
    colorings = {}
    coloring_reports = []
    for primitive_class in primitives.class_priorities:
        members = {i: primitives.primitives[i] for i in primitives.ids_of_class(primitive_class)}
        graph = build_conflict_graph(members, lattice)
        coloring = hybrid_color(graph, timeout=timeout, seed=seed)
        sizes = {i: len(p.syndrome_set) for i, p in members.items()}
        colorings[primitive_class] = reorder_colors(coloring, sizes)
        method = coloring.method
        if coloring.heuristic is not None:
            method = f"{coloring.method} ({coloring.heuristic})"
        logger.info("%s: %d primitives, omega >= %d, %d colours via %s", primitive_class,
                    len(members), graph.omega_lb, coloring.num_colors, method)
        coloring_reports.append(ClassColoringReport(
            primitive_class=primitive_class.value,
            nodes=len(members),
            edges=graph.num_edges,
            omega_lb=graph.omega_lb,
            colors=coloring.num_colors,
            method=method,
        ))

    rows = []
    for row in class_table(primitives):
        entry = asdict(row)
        entry["primitive_class"] = row.primitive_class.value
        rows.append(entry)
    generated = primitives.stats["generated"]
    report = BuildReport(
        mechanisms=len(dem.mechanisms),
        merged_away=len(dem.mechanisms) - len(normalized.mechanisms),
        generated=generated,
        round_pruned=generated - after_rounds,
        composite_pruned=primitives.stats["composite_pruned"],
        composite_skipped=primitives.stats["composite_skipped"],
        retained=len(primitives),
        flagged=len(primitives.flagged),
        depth=sum(c.num_colors for c in colorings.values()),
        classes=rows,
        colorings=coloring_reports,
        notes=list(primitives.notes),
    )
    pipeline = assemble_pipeline(primitives, colorings, normalized, code=code, source=source,
                                 build=report.to_dict())
    return pipeline, report


def class_coloring_summary(pipeline: Pipeline) -> List[Dict[str, object]]:
    """Per-class conflict-graph statistics of an assembled pipeline."""
    summary = []
    for primitive_class in pipeline.class_priorities:
        ids = [i for i, p in enumerate(pipeline.primitives) if p.primitive_class == primitive_class]
        graph = build_conflict_graph({i: pipeline.primitives[i] for i in ids}, pipeline.lattice)
        summary.append({
            "class": primitive_class.value,
            "nodes": len(ids),
            "edges": graph.num_edges,
            "omega_lb": graph.omega_lb,
            "colors": sum(1 for c in pipeline.class_of_stage if c == primitive_class),
        })
    return summary
