"""Predecoding primitives.

A primitive is a conditional rule ``(S, O)``: when every detector in ``S`` is
active, clear them and flip the observables in ``O``. One primitive is generated
per mechanism of a normalized detector error model; the set is then reduced by
collapsing time-translated copies and removing composites of smaller primitives,
and finally classified and ranked.
"""
import logging
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import groupby
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

from qpredec.dem.model import DetectorErrorModel, DetectorLattice, structure_digest

logger = logging.getLogger(__name__)


class PrimitiveClass(str, Enum):
    TIME_LIKE = "TimeLike"
    BULK_SPACE_LIKE = "BulkSpaceLike"
    EDGE_SPACE_LIKE = "EdgeSpaceLike"
    SPACETIME_LIKE = "SpacetimeLike"
    HOOK_LIKE = "HookLike"
    UNCLASSIFIED = "Unclassified"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Primitive:
    """One predecoding rule.

    Parameters
    ----------
    syndrome_set : tuple of int
        Detectors that must all be active; cleared on firing.
    observable_set : tuple of int
        Observables flipped on firing.
    probability : float
        Probability of the mechanism(s) the primitive stands for.
    primitive_class : PrimitiveClass, default=UNCLASSIFIED
    canonical_round : int, default=0
    source_ids : tuple of int, default=()
        Provenance of the underlying mechanisms.
    pattern : tuple of (int, int), default=()
        (spatial id, relative round) cells of ``syndrome_set``, set by
        :func:`prune_round_offsets`.
    shiftable : bool, default=False
        Whether the primitive is applied at every round offset where its pattern fits.
    """
    syndrome_set: Tuple[int, ...]
    observable_set: Tuple[int, ...]
    probability: float
    primitive_class: PrimitiveClass = PrimitiveClass.UNCLASSIFIED
    canonical_round: int = 0
    source_ids: Tuple[int, ...] = ()
    pattern: Tuple[Tuple[int, int], ...] = ()
    shiftable: bool = False

    def __post_init__(self):
        object.__setattr__(self, "syndrome_set", tuple(sorted(set(self.syndrome_set))))
        object.__setattr__(self, "observable_set", tuple(sorted(set(self.observable_set))))
        object.__setattr__(self, "source_ids", tuple(sorted(set(self.source_ids))))
        object.__setattr__(self, "pattern", tuple(tuple(cell) for cell in self.pattern))
        object.__setattr__(self, "primitive_class", PrimitiveClass(self.primitive_class))
        if not self.syndrome_set:
            raise ValueError("`syndrome_set` must be non-empty.")
        if self.shiftable and not self.pattern:
            raise ValueError("shiftable primitives need a `pattern`.")

    @property
    def key(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        return self.syndrome_set, self.observable_set


@dataclass(frozen=True)
class PrimitiveSet:
    """An immutable collection of primitives derived from one model.

    Parameters
    ----------
    primitives : tuple of Primitive
        Primitive ids are positions in this tuple.
    dem_ref : str
        Structure digest of the source model.
    class_priorities : tuple of PrimitiveClass, default=()
        Present classes, highest priority first.
    flagged : tuple of int, default=()
        Ids of primitives exceeding the two-round window.
    round_pruned : bool, default=False
        Whether round-offset pruning was applied.
    notes : tuple of str, default=()
        Conditions reported by the stages that produced the set.
    stats : dict, optional
        Flow counts; not part of equality.
    """
    primitives: Tuple[Primitive, ...]
    dem_ref: str
    class_priorities: Tuple[PrimitiveClass, ...] = ()
    flagged: Tuple[int, ...] = ()
    round_pruned: bool = False
    notes: Tuple[str, ...] = ()
    stats: Dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))
        keys = [p.key for p in self.primitives]
        if len(set(keys)) != len(keys):
            raise ValueError("primitives must have distinct (S, O) pairs.")
        priorities = tuple(PrimitiveClass(c) for c in self.class_priorities)
        object.__setattr__(self, "class_priorities", priorities)
        if priorities:
            if len(set(priorities)) != len(priorities) or set(priorities) != self.classes():
                raise ValueError(
                    "`class_priorities` must list each present class exactly once, got "
                    f"{[str(c) for c in priorities]}."
                )
            edge = PrimitiveClass.EDGE_SPACE_LIKE
            if edge in priorities and priorities[-1] != edge:
                raise ValueError("EdgeSpaceLike must be the last class priority.")

    def __len__(self):
        return len(self.primitives)

    def classes(self):
        return {p.primitive_class for p in self.primitives}

    def ids_of_class(self, primitive_class: PrimitiveClass) -> List[int]:
        return [i for i, p in enumerate(self.primitives) if p.primitive_class == primitive_class]


def generate_primitives(dem: DetectorErrorModel) -> PrimitiveSet:
    """Create one primitive per mechanism of a normalized model.

    Raises
    ------
    ValueError
        If two mechanisms share detector and observable sets.
    """
    keys = [m.key for m in dem.mechanisms]
    if len(set(keys)) != len(keys):
        raise ValueError("`dem` must be normalized with merge_duplicates first.")
    primitives = tuple(
        Primitive(
            syndrome_set=m.detectors,
            observable_set=m.observables,
            probability=m.probability,
            source_ids=m.source_ids,
        )
        for m in dem.mechanisms
    )
    logger.info("generated %d primitives", len(primitives))
    return PrimitiveSet(primitives, dem_ref=structure_digest(dem),
                        stats={"generated": len(primitives)})


def prune_round_offsets(primitive_set: PrimitiveSet, dem: DetectorErrorModel) -> PrimitiveSet:
    """Collapse primitives that are time-translated copies of each other.

    Each primitive's detectors are written as (spatial id, round - base round)
    cells. Copies with equal cells and observables collapse to the earliest copy,
    which takes the maximum probability of the copies. A pattern seen at two or
    more offsets becomes shiftable; one seen once keeps its pattern and its absolute
    position. Primitives spanning more than two rounds are kept at their absolute
    position and flagged.

    Parameters
    ----------
    primitive_set : PrimitiveSet
    dem : DetectorErrorModel
        Source model; must carry round metadata.

    Returns
    -------
    pruned : PrimitiveSet
        The input unchanged, with a note and a warning, when ``dem`` has no rounds.
    """
    lattice = dem.lattice()
    if lattice is None:
        message = "round metadata missing; round-offset pruning skipped"
        warnings.warn(message + ".", UserWarning)
        if message in primitive_set.notes:
            return primitive_set
        return replace(primitive_set, notes=primitive_set.notes + (message,))

    slots: List[Tuple[str, object]] = []
    groups: Dict[tuple, List[Tuple[int, int, object]]] = {}
    for index, primitive in enumerate(primitive_set.primitives):
        base, pattern = lattice.pattern(primitive.syndrome_set)
        if len({r for _, r in pattern}) > 2:
            slots.append(("wide", replace(primitive, pattern=pattern, shiftable=False,
                                          canonical_round=0)))
            continue
        key = (pattern, primitive.observable_set)
        if key not in groups:
            groups[key] = []
            slots.append(("group", key))
        groups[key].append((base, index, primitive))

    primitives, flagged = [], []
    for kind, item in slots:
        if kind == "wide":
            flagged.append(len(primitives))
            primitives.append(item)
            continue
        copies = groups[item]
        _, _, earliest = min(copies, key=lambda c: (c[0], c[1]))
        primitives.append(replace(
            earliest,
            probability=max(c[2].probability for c in copies),
            source_ids=tuple(sorted({s for c in copies for s in c[2].source_ids})),
            pattern=item[0],
            shiftable=len(copies) > 1 or any(c[2].shiftable for c in copies),
            canonical_round=0,
        ))
    if flagged:
        warnings.warn(
            f"{len(flagged)} primitive(s) span more than two rounds and are applied only at "
            "their absolute position.",
            UserWarning,
        )
    removed = len(primitive_set) - len(primitives)
    logger.info("round-offset pruning removed %d of %d primitives", removed, len(primitive_set))
    stats = dict(primitive_set.stats, round_pruned=removed)
    return replace(primitive_set, primitives=tuple(primitives), flagged=tuple(flagged),
                   round_pruned=True, stats=stats)


def _cover_observables(
    uncovered: FrozenSet[int],
    candidates: Sequence[Tuple[FrozenSet[int], FrozenSet[int]]],
    max_cover: Optional[int],
    observables: FrozenSet[int] = frozenset(),
    depth: int = 0,
) -> Iterator[FrozenSet[int]]:
    """Yield the observable XOR of every exact disjoint cover of ``uncovered``.

    The candidate covering the smallest uncovered detector is branched on, so each
    cover is produced once.
    """
    if not uncovered:
        yield observables
        return
    if max_cover is not None and depth == max_cover:
        return
    pivot = min(uncovered)
    for syndrome, flips in candidates:
        if pivot in syndrome and syndrome <= uncovered:
            yield from _cover_observables(uncovered - syndrome, candidates, max_cover,
                                          observables ^ flips, depth + 1)


def is_composite(
    target: Primitive,
    candidates: Sequence[Primitive],
    unanimous: bool = True,
    max_cover: Optional[int] = 3,
) -> bool:
    """Whether ``target`` is reproduced by a disjoint cover of smaller primitives.

    Parameters
    ----------
    target : Primitive
    candidates : sequence of Primitive
        Primitives whose syndrome sets are proper subsets of the target's.
    unanimous : bool, default=True
        Require every cover to match the target's observables. Otherwise one
        matching cover suffices.
    max_cover : int or None, default=3
        Largest cover cardinality searched; None searches without bound.
    """
    sets = [(frozenset(c.syndrome_set), frozenset(c.observable_set)) for c in candidates]
    wanted = frozenset(target.observable_set)
    covers = _cover_observables(frozenset(target.syndrome_set), sets, max_cover)
    if not unanimous:
        return any(observables == wanted for observables in covers)
    found = False
    for observables in covers:
        if observables != wanted:
            return False
        found = True
    return found


def prune_composites(
    primitive_set: PrimitiveSet,
    unanimous: bool = True,
    max_cover: int = 3,
    max_candidates: int = 64,
) -> PrimitiveSet:
    """Remove primitives whose rule is a disjoint combination of smaller ones.

    By default a target goes only when every cover found reproduces its
    observables. This is stricter than the plain rule of removing a target as soon
    as any cover XORs to its ``O``: a target with two covers that differ by a logical
    operator, as hook errors often have, stays in the set. ``unanimous=False``
    restores the plain rule.

    Targets are visited smallest ``|S|`` first. Candidates are the retained
    primitives of strictly smaller size whose syndrome set lies inside the target's,
    so removals among equal-size primitives never influence each other.

    Parameters
    ----------
    primitive_set : PrimitiveSet
    unanimous : bool, default=True
        Remove a target only if every cover found XORs to its observables, so a
        cover differing by a logical operator keeps it. ``False`` removes a target as
        soon as one cover matches.
    max_cover : int, default=3
        Largest cover cardinality searched.
    max_candidates : int, default=64
        Targets with more candidates are retained without searching.

    Returns
    -------
    pruned : PrimitiveSet
        Retained primitives ordered by ascending ``|S|``, ties in input order.
    """
    primitives = primitive_set.primitives
    order = sorted(range(len(primitives)), key=lambda i: (len(primitives[i].syndrome_set), i))
    kept: List[int] = []
    skipped = 0
    for _, same_size in groupby(order, key=lambda i: len(primitives[i].syndrome_set)):
        kept_here = []
        for i in same_size:
            target = primitives[i]
            target_set = set(target.syndrome_set)
            candidates = [primitives[j] for j in kept
                          if target_set.issuperset(primitives[j].syndrome_set)]
            if len(candidates) > max_candidates:
                logger.debug("composite search skipped for S=%s: %d candidates",
                             list(target.syndrome_set), len(candidates))
                skipped += 1
                kept_here.append(i)
            elif not is_composite(target, candidates, unanimous, max_cover):
                kept_here.append(i)
        kept.extend(kept_here)

    removed = len(primitives) - len(kept)
    flagged_before = set(primitive_set.flagged)
    flagged = tuple(position for position, i in enumerate(kept) if i in flagged_before)
    logger.info("composite pruning removed %d of %d primitives (%d searches skipped)",
                removed, len(primitives), skipped)
    stats = dict(primitive_set.stats, composite_pruned=removed, composite_skipped=skipped)
    return replace(primitive_set, primitives=tuple(primitives[i] for i in kept),
                   flagged=flagged, class_priorities=(), stats=stats)


def _class_of(
    primitive: Primitive,
    lattice: DetectorLattice,
    sidecar: Optional[Mapping[int, str]],
) -> PrimitiveClass:
    cells = [lattice.cell(d) for d in primitive.syndrome_set]
    spatial_ids = {s for s, _ in cells}
    rounds = {r for _, r in cells}
    if len(cells) == 1:
        return PrimitiveClass.EDGE_SPACE_LIKE
    if len(cells) == 2 and len(spatial_ids) == 1 and abs(cells[0][1] - cells[1][1]) == 1:
        return PrimitiveClass.TIME_LIKE
    if len(rounds) == 1:
        return PrimitiveClass.BULK_SPACE_LIKE
    if sidecar is not None:
        kinds = {sidecar.get(i) for i in primitive.source_ids}
        if len(spatial_ids) >= 2 and "hook" in kinds:
            return PrimitiveClass.HOOK_LIKE
    elif len(cells) >= 3 and len(spatial_ids) >= 3:
        return PrimitiveClass.HOOK_LIKE
    return PrimitiveClass.SPACETIME_LIKE


def classify(
    primitive_set: PrimitiveSet,
    dem: DetectorErrorModel,
    sidecar: Optional[Mapping[int, str]] = None,
) -> PrimitiveSet:
    """Label every primitive with its class.

    Rules, first match wins: EdgeSpaceLike for a single detector; TimeLike for two
    detectors of one check in consecutive rounds; BulkSpaceLike within one round;
    HookLike across rounds (sidecar-marked hook mechanisms on two or more checks,
    or without a sidecar three or more detectors on three or more checks);
    SpacetimeLike otherwise.

    Parameters
    ----------
    primitive_set : PrimitiveSet
    dem : DetectorErrorModel
    sidecar : mapping of int to str, optional
        Mechanism kind ("data", "measurement", "hook") by mechanism source id.

    Returns
    -------
    classified : PrimitiveSet
        All primitives Unclassified, with a warning, when ``dem`` has no rounds.
    """
    lattice = dem.lattice()
    if lattice is None:
        warnings.warn("round metadata missing; primitives left Unclassified.", UserWarning)
        primitives = tuple(replace(p, primitive_class=PrimitiveClass.UNCLASSIFIED)
                           for p in primitive_set.primitives)
    else:
        primitives = tuple(replace(p, primitive_class=_class_of(p, lattice, sidecar))
                           for p in primitive_set.primitives)
    return replace(primitive_set, primitives=primitives, class_priorities=())


def rank_classes(primitive_set: PrimitiveSet) -> Tuple[PrimitiveClass, ...]:
    """Order present classes by average per-primitive probability, highest first.

    EdgeSpaceLike always comes last; equal averages are ordered by class name.
    """
    totals: Dict[PrimitiveClass, List[float]] = {}
    for primitive in primitive_set.primitives:
        totals.setdefault(primitive.primitive_class, []).append(primitive.probability)
    average = {c: sum(ps) / len(ps) for c, ps in totals.items()}
    return tuple(sorted(
        average,
        key=lambda c: (c == PrimitiveClass.EDGE_SPACE_LIKE, -average[c], c.value),
    ))


def prioritize(primitive_set: PrimitiveSet) -> PrimitiveSet:
    """Attach :func:`rank_classes` to the set."""
    return replace(primitive_set, class_priorities=rank_classes(primitive_set))


@dataclass(frozen=True)
class ClassStats:
    primitive_class: PrimitiveClass
    count: int
    probability_sum: float
    conditional_probability: float
    average_probability: float


def class_table(primitive_set: PrimitiveSet) -> List[ClassStats]:
    """Per-class probability table in priority order.

    ``conditional_probability`` is the class's share of the summed primitive
    probability; ``average_probability`` is the ranking key.
    """
    order = primitive_set.class_priorities or rank_classes(primitive_set)
    total = sum(p.probability for p in primitive_set.primitives)
    rows = []
    for primitive_class in order:
        members = [p.probability for p in primitive_set.primitives
                   if p.primitive_class == primitive_class]
        class_sum = sum(members)
        rows.append(ClassStats(
            primitive_class=primitive_class,
            count=len(members),
            probability_sum=class_sum,
            conditional_probability=class_sum / total if total > 0 else 0.,
            average_probability=class_sum / len(members),
        ))
    return rows


def format_class_table(rows: Sequence[ClassStats]) -> str:
    lines = [f"{'class':<15}{'count':>7}{'sum p':>13}{'cond. p':>11}{'avg p':>13}"]
    for row in rows:
        lines.append(
            f"{row.primitive_class.value:<15}{row.count:>7}{row.probability_sum:>13.4e}"
            f"{row.conditional_probability:>11.4f}{row.average_probability:>13.4e}"
        )
    return "\n".join(lines)
