"""Software execution of a predecoder pipeline."""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from qpredec.pipeline.assembly import Pipeline


@dataclass(frozen=True, eq=False)
class PredecodeOutcome:
    """Result of running the pipeline on one syndrome.

    ``fully_resolved`` holds iff ``residual_syndrome`` is all zero, and
    ``predicted_observable_flips`` is the XOR of ``O`` over every firing.
    """
    residual_syndrome: np.ndarray
    predicted_observable_flips: np.ndarray
    fully_resolved: bool
    fired_primitive_ids: Tuple[int, ...]
    per_stage_fire_counts: Tuple[int, ...]


class Predecoder:
    """A pipeline with every primitive expanded to its concrete detector sets.

    Shiftable primitives get one instance per base round at which their whole
    pattern exists, lowest round first; other primitives have their own syndrome
    set as the single instance. Stages run in order. Within a stage every instance
    whose detectors are all active fires, clearing them and flipping its
    observables; overlapping instances of one primitive resolve lowest round first.

    Parameters
    ----------
    pipeline : Pipeline
    """

    def __init__(self, pipeline: Pipeline):
        self.pipeline = pipeline
        self.num_detectors = pipeline.num_detectors
        self.num_observables = pipeline.num_observables
        self.stages: List[List[Tuple[int, List[Tuple[int, ...]], Tuple[int, ...]]]] = []
        for stage in pipeline.stages:
            compiled = []
            for pid in stage:
                primitive = pipeline.primitives[pid]
                if primitive.shiftable and pipeline.lattice is not None:
                    instances = []
                    for base in range(pipeline.lattice.num_rounds):
                        instance = pipeline.lattice.instantiate(primitive.pattern, base)
                        if instance is not None:
                            instances.append(instance)
                else:
                    instances = [primitive.syndrome_set]
                compiled.append((pid, instances, primitive.observable_set))
            self.stages.append(compiled)

    def run(self, syndrome) -> PredecodeOutcome:
        syndrome = np.asarray(syndrome)
        if syndrome.shape != (self.num_detectors,):
            raise ValueError(
                f"`syndrome` shape must be ({self.num_detectors},), got {syndrome.shape}."
            )
        active = syndrome.astype(bool).tolist()
        flips = [False] * self.num_observables
        fired: List[int] = []
        counts: List[int] = []
        for stage in self.stages:
            count = 0
            for pid, instances, observables in stage:
                for instance in instances:
                    if all(active[d] for d in instance):
                        for d in instance:
                            active[d] = False
                        for o in observables:
                            flips[o] = not flips[o]
                        fired.append(pid)
                        count += 1
            counts.append(count)
        residual = np.array(active, dtype=np.uint8)
        return PredecodeOutcome(
            residual_syndrome=residual,
            predicted_observable_flips=np.array(flips, dtype=np.uint8),
            fully_resolved=not residual.any(),
            fired_primitive_ids=tuple(fired),
            per_stage_fire_counts=tuple(counts),
        )


def run_predecoder(pipeline: Pipeline, syndrome) -> PredecodeOutcome:
    """Run ``pipeline`` once on ``syndrome``."""
    return Predecoder(pipeline).run(syndrome)
