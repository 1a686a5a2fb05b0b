"""Priority-ordered predecoder pipelines."""
import logging
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Tuple

from qpredec.dem.model import DetectorErrorModel, DetectorLattice
from qpredec.pipeline.coloring import Coloring
from qpredec.pipeline.graph import footprint
from qpredec.primitives import Primitive, PrimitiveClass, PrimitiveSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CostEstimate:
    """Abstract hardware cost of a pipeline.

    Parameters
    ----------
    and_gate_inputs : int
        Sum of ``|S|`` over staged primitives.
    register_bits : int
        ``depth * (num_detectors + num_observables)``.
    primitive_count : int
        Number of staged primitives.
    """
    and_gate_inputs: int
    register_bits: int
    primitive_count: int

    def to_dict(self) -> Dict[str, int]:
        return {
            "and_gate_inputs": self.and_gate_inputs,
            "register_bits": self.register_bits,
            "primitive_count": self.primitive_count,
        }


@dataclass(frozen=True)
class Pipeline:
    """Ordered stages of mutually non-conflicting primitives.

    Parameters
    ----------
    primitives : tuple of Primitive
        Primitive table; stages refer to positions in it.
    stages : tuple of tuple of int
        Primitive ids per stage, ascending within a stage.
    class_of_stage : tuple of PrimitiveClass
    class_priorities : tuple of PrimitiveClass
    num_detectors, num_observables : int
    dem_digest : str
        Structure digest of the model the pipeline was built from.
    lattice : DetectorLattice, optional
        Present when primitives are applied at every round offset.
    code : str, default=""
        Label of the source code or model.
    source : dict, optional
        Description of the input the pipeline was built from. Not part of equality.
    build : dict, optional
        Build report. Not part of equality.
    """
    primitives: Tuple[Primitive, ...]
    stages: Tuple[Tuple[int, ...], ...]
    class_of_stage: Tuple[PrimitiveClass, ...]
    class_priorities: Tuple[PrimitiveClass, ...]
    num_detectors: int
    num_observables: int
    dem_digest: str
    lattice: Optional[DetectorLattice] = None
    code: str = ""
    source: Optional[dict] = field(default=None, compare=False)
    build: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))
        object.__setattr__(self, "stages", tuple(tuple(sorted(s)) for s in self.stages))
        object.__setattr__(self, "class_of_stage",
                           tuple(PrimitiveClass(c) for c in self.class_of_stage))
        object.__setattr__(self, "class_priorities",
                           tuple(PrimitiveClass(c) for c in self.class_priorities))
        if len(self.class_of_stage) != len(self.stages):
            raise ValueError(
                f"`class_of_stage` must label every stage, got {len(self.class_of_stage)} "
                f"labels for {len(self.stages)} stages."
            )

    @property
    def depth(self) -> int:
        return len(self.stages)

    @property
    def cost(self) -> CostEstimate:
        staged = [self.primitives[i] for stage in self.stages for i in stage]
        return CostEstimate(
            and_gate_inputs=sum(len(p.syndrome_set) for p in staged),
            register_bits=self.depth * (self.num_detectors + self.num_observables),
            primitive_count=len(staged),
        )

    def staged_ids(self) -> List[int]:
        return [i for stage in self.stages for i in stage]


def validate_pipeline(pipeline: Pipeline, require_partition: bool = False):
    """Check pipeline invariants from the primitive syndrome sets.

    Parameters
    ----------
    pipeline : Pipeline
    require_partition : bool, default=False
        Also require every primitive of the table to be staged.

    Raises
    ------
    ValueError
        On the first violated invariant.
    """
    staged = pipeline.staged_ids()
    if len(set(staged)) != len(staged):
        raise ValueError("a primitive appears in more than one stage.")
    if any(not 0 <= i < len(pipeline.primitives) for i in staged):
        raise ValueError("a stage refers to an unknown primitive.")
    if require_partition and len(staged) != len(pipeline.primitives):
        raise ValueError(
            f"stages hold {len(staged)} of {len(pipeline.primitives)} primitives."
        )
    rank = {c: r for r, c in enumerate(pipeline.class_priorities)}
    previous = -1
    for index, (stage, stage_class) in enumerate(zip(pipeline.stages, pipeline.class_of_stage)):
        if stage_class not in rank or rank[stage_class] < previous:
            raise ValueError(f"stage {index} of class {stage_class} breaks the class order.")
        previous = rank[stage_class]
        for i in stage:
            if pipeline.primitives[i].primitive_class != stage_class:
                raise ValueError(f"primitive {i} in stage {index} is not of class {stage_class}.")
        for u, v in combinations(stage, 2):
            shared = (footprint(pipeline.primitives[u], pipeline.lattice)
                      & footprint(pipeline.primitives[v], pipeline.lattice))
            if shared:
                raise ValueError(f"primitives {u} and {v} conflict in stage {index}.")


def assemble_pipeline(
    primitive_set: PrimitiveSet,
    colorings: Mapping[PrimitiveClass, Coloring],
    dem: DetectorErrorModel,
    code: str = "",
    source: Optional[dict] = None,
    build: Optional[dict] = None,
) -> Pipeline:
    """Concatenate the colour groups of every class in priority order.

    Parameters
    ----------
    primitive_set : PrimitiveSet
        Classified and prioritized set.
    colorings : mapping of PrimitiveClass to Coloring
        One colouring per present class over that class's primitive ids; colour 0
        becomes the class's first stage.
    dem : DetectorErrorModel
        Source model, for detector and observable counts and the round lattice.

    Returns
    -------
    pipeline : Pipeline
        Depth is the sum of per-class colour counts.
    """
    if primitive_set.primitives and not primitive_set.class_priorities:
        raise ValueError("`primitive_set` must carry class priorities.")
    if set(colorings) != set(primitive_set.class_priorities):
        raise ValueError(
            "colorings must cover exactly the present classes "
            f"{[str(c) for c in primitive_set.class_priorities]}, got "
            f"{sorted(str(c) for c in colorings)}."
        )
    stages, labels = [], []
    for primitive_class in primitive_set.class_priorities:
        coloring = colorings[primitive_class]
        if set(coloring.assignment) != set(primitive_set.ids_of_class(primitive_class)):
            raise ValueError(f"coloring of {primitive_class} does not match its primitives.")
        for group in coloring.groups():
            stages.append(tuple(group))
            labels.append(primitive_class)
    pipeline = Pipeline(
        primitives=primitive_set.primitives,
        stages=tuple(stages),
        class_of_stage=tuple(labels),
        class_priorities=primitive_set.class_priorities,
        num_detectors=dem.num_detectors,
        num_observables=dem.num_observables,
        dem_digest=primitive_set.dem_ref,
        lattice=dem.lattice() if primitive_set.round_pruned else None,
        code=code,
        source=source,
        build=build or {},
    )
    validate_pipeline(pipeline, require_partition=True)
    logger.info("assembled pipeline of depth %d", pipeline.depth)
    return pipeline


def truncate_pipeline(pipeline: Pipeline, stages_to_remove: int) -> Pipeline:
    """Drop the last ``stages_to_remove`` stages.

    Retained stages keep their content and order. Removing zero stages is always
    allowed; otherwise ``stages_to_remove`` must be below the depth.
    """
    if stages_to_remove < 0 or (stages_to_remove and stages_to_remove >= pipeline.depth):
        raise ValueError(
            f"`stages_to_remove` must be in [0, {max(pipeline.depth - 1, 0)}], "
            f"got {stages_to_remove}."
        )
    if stages_to_remove == 0:
        return pipeline
    keep = pipeline.depth - stages_to_remove
    return replace(pipeline, stages=pipeline.stages[:keep],
                   class_of_stage=pipeline.class_of_stage[:keep])
