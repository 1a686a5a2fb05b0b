"""Pipeline artifacts: JSON description and netlist-style text."""
import json
from typing import Any, Dict

from qpredec.dem.model import DetectorLattice
from qpredec.pipeline.assembly import Pipeline, validate_pipeline
from qpredec.primitives import Primitive

FORMAT_NAME = "qpredec-pipeline"
FORMAT_VERSION = 1
EMIT_FORMATS = ("json", "netlist-text")


def _primitive_to_dict(pid: int, primitive: Primitive) -> Dict[str, Any]:
    return {
        "id": pid,
        "S": list(primitive.syndrome_set),
        "O": list(primitive.observable_set),
        "class": primitive.primitive_class.value,
        "probability": primitive.probability,
        "canonical_round": primitive.canonical_round,
        "source_ids": list(primitive.source_ids),
        "pattern": [list(cell) for cell in primitive.pattern],
        "shiftable": primitive.shiftable,
    }


def pipeline_to_dict(pipeline: Pipeline) -> Dict[str, Any]:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "code": pipeline.code,
        "dem_digest": pipeline.dem_digest,
        "num_detectors": pipeline.num_detectors,
        "num_observables": pipeline.num_observables,
        "classes": [c.value for c in pipeline.class_priorities],
        "depth": pipeline.depth,
        "cost": pipeline.cost.to_dict(),
        "lattice": pipeline.lattice.to_list() if pipeline.lattice is not None else None,
        "primitives": [_primitive_to_dict(i, p) for i, p in enumerate(pipeline.primitives)],
        "stages": [
            {
                "class": stage_class.value,
                "primitives": [
                    {
                        "id": i,
                        "S": list(pipeline.primitives[i].syndrome_set),
                        "O": list(pipeline.primitives[i].observable_set),
                    }
                    for i in stage
                ],
            }
            for stage, stage_class in zip(pipeline.stages, pipeline.class_of_stage)
        ],
        "source": pipeline.source,
        "build": pipeline.build,
    }


def pipeline_to_json(pipeline: Pipeline) -> str:
    return json.dumps(pipeline_to_dict(pipeline), indent=2) + "\n"


def pipeline_to_netlist(pipeline: Pipeline) -> str:
    """One ``STAGE`` header per stage followed by one ``PRIM`` line per primitive."""
    lines = [
        f"# qpredec netlist code={pipeline.code or '-'} depth={pipeline.depth} "
        f"detectors={pipeline.num_detectors} observables={pipeline.num_observables}",
    ]
    if pipeline.lattice is not None:
        lines.append("# shiftable primitives are listed at round 0 and repeat every round")
    for index, (stage, stage_class) in enumerate(zip(pipeline.stages, pipeline.class_of_stage)):
        lines.append(f"STAGE {index} CLASS {stage_class.value}")
        for i in stage:
            primitive = pipeline.primitives[i]
            detectors = [f"D{d}" for d in primitive.syndrome_set]
            observables = ",".join(f"L{o}" for o in primitive.observable_set)
            lines.append(
                f"PRIM cond={'&'.join(detectors)} -> clear({','.join(detectors)}) "
                f"flip({observables})"
            )
    return "\n".join(lines) + "\n"


def emit_pipeline(pipeline: Pipeline, format: str = "json") -> str:
    """Render a pipeline as ``json`` or ``netlist-text``; deterministic byte for byte."""
    if format == "json":
        return pipeline_to_json(pipeline)
    if format == "netlist-text":
        return pipeline_to_netlist(pipeline)
    raise ValueError(f"`format` must be one of {EMIT_FORMATS}, got {format!r}.")


def pipeline_from_dict(data: Dict[str, Any]) -> Pipeline:
    if data.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} document.")
    if data.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported pipeline format version {data.get('version')!r}.")
    primitives = tuple(
        Primitive(
            syndrome_set=entry["S"],
            observable_set=entry["O"],
            probability=entry["probability"],
            primitive_class=entry["class"],
            canonical_round=entry["canonical_round"],
            source_ids=entry["source_ids"],
            pattern=[tuple(cell) for cell in entry["pattern"]],
            shiftable=entry["shiftable"],
        )
        for entry in sorted(data["primitives"], key=lambda e: e["id"])
    )
    lattice = None
    if data["lattice"] is not None:
        lattice = DetectorLattice([s for s, _ in data["lattice"]], [r for _, r in data["lattice"]])
    pipeline = Pipeline(
        primitives=primitives,
        stages=tuple(tuple(p["id"] for p in stage["primitives"]) for stage in data["stages"]),
        class_of_stage=tuple(stage["class"] for stage in data["stages"]),
        class_priorities=tuple(data["classes"]),
        num_detectors=data["num_detectors"],
        num_observables=data["num_observables"],
        dem_digest=data["dem_digest"],
        lattice=lattice,
        code=data["code"],
        source=data.get("source"),
        build=data.get("build") or {},
    )
    validate_pipeline(pipeline)
    return pipeline


def read_pipeline(text: str) -> Pipeline:
    """Parse a JSON pipeline artifact back into a :class:`Pipeline`.

    Raises
    ------
    ValueError
        If the document is not a pipeline or violates pipeline invariants.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ValueError(f"malformed pipeline JSON: {error}")
    try:
        return pipeline_from_dict(data)
    except (KeyError, TypeError) as error:
        raise ValueError(f"malformed pipeline document: missing or invalid {error}")


def load_pipeline(path) -> Pipeline:
    with open(path, "r", encoding="utf-8") as f:
        return read_pipeline(f.read())


def save_pipeline(pipeline: Pipeline, path, format: str = "json"):
    with open(path, "w", encoding="utf-8") as f:
        f.write(emit_pipeline(pipeline, format))
