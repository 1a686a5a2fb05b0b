"""Detector error model types.

A detector error model (DEM) is the decoding hypergraph of a code under a noise
model: a list of independent error mechanisms, each with a probability, the set of
detectors it activates and the set of logical observables it flips.
"""
import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse


class UndetectableMechanismError(ValueError):
    """A mechanism flips logical observables without activating any detector."""


def _canonical_indices(indices: Iterable[int], name: str) -> Tuple[int, ...]:
    indices = tuple(int(i) for i in indices)
    if any(i < 0 for i in indices):
        raise ValueError(f"`{name}` must be non-negative, got {indices}.")
    canonical = tuple(sorted(set(indices)))
    if len(canonical) != len(indices):
        raise ValueError(f"`{name}` must be duplicate-free, got {indices}.")
    return canonical


def xor_probability(p1: float, p2: float) -> float:
    """Probability that exactly one of two independent events occurs."""
    return p1 * (1. - p2) + p2 * (1. - p1)


@dataclass(frozen=True)
class Mechanism:
    """One independent error mechanism.

    Parameters
    ----------
    probability : float
        Firing probability, in (0, 1).
    detectors : tuple of int
        Detector indices activated by the mechanism (non-empty).
    observables : tuple of int, default=()
        Logical observable indices flipped by the mechanism.
    source_ids : tuple of int, default=()
        Provenance: indices of the mechanisms of the parsed/built model this one
        was derived from. Not part of equality.
    """
    probability: float
    detectors: Tuple[int, ...]
    observables: Tuple[int, ...] = ()
    source_ids: Tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not 0. < self.probability < 1.:
            raise ValueError(f"`probability` must be in (0, 1), got {self.probability}.")
        object.__setattr__(self, "probability", float(self.probability))
        object.__setattr__(self, "detectors", _canonical_indices(self.detectors, "detectors"))
        object.__setattr__(self, "observables", _canonical_indices(self.observables, "observables"))
        object.__setattr__(self, "source_ids", tuple(sorted(int(i) for i in self.source_ids)))
        if not self.detectors:
            if self.observables:
                raise UndetectableMechanismError(
                    f"undetectable logical error channel: observables {list(self.observables)} "
                    "are flipped without any detector."
                )
            raise ValueError("`detectors` must be non-empty.")

    @property
    def key(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        return self.detectors, self.observables


@dataclass(frozen=True)
class DetectorInfo:
    """Coordinate and round metadata of one detector.

    The final coordinate is the time coordinate; ``round`` is its integer part and
    is filled in from the coordinates when not given.
    """
    index: int
    coords: Optional[Tuple[float, ...]] = None
    round: Optional[int] = None

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"`index` must be non-negative, got {self.index}.")
        if self.coords is not None:
            coords = tuple(float(c) for c in self.coords)
            object.__setattr__(self, "coords", coords)
            if coords:
                inferred = int(coords[-1])
                if self.round is None:
                    object.__setattr__(self, "round", inferred)
                elif self.round != inferred:
                    raise ValueError(
                        f"`round` must equal the truncated final coordinate {inferred}, "
                        f"got {self.round}."
                    )
        if self.round is not None and self.round < 0:
            raise ValueError(f"`round` must be non-negative, got {self.round}.")

    @property
    def spatial_coords(self) -> Optional[Tuple[float, ...]]:
        if self.coords is None or self.round is None:
            return None
        return self.coords[:-1]


class DetectorLattice:
    """Bijection between detector indices and (spatial id, round) cells.

    Spatial ids number the distinct spatial coordinate tuples in sorted order.

    Parameters
    ----------
    spatial_ids : sequence of int, shape [num_detectors]
    rounds : sequence of int, shape [num_detectors]
    """

    def __init__(self, spatial_ids: Sequence[int], rounds: Sequence[int]):
        if len(spatial_ids) != len(rounds):
            raise ValueError(
                f"`spatial_ids` and `rounds` must have equal length, got {len(spatial_ids)} "
                f"and {len(rounds)}."
            )
        self.spatial_ids = tuple(int(s) for s in spatial_ids)
        self.rounds = tuple(int(r) for r in rounds)
        self._index: Dict[Tuple[int, int], int] = {}
        for detector, cell in enumerate(zip(self.spatial_ids, self.rounds)):
            if cell in self._index:
                raise ValueError(
                    f"detectors {self._index[cell]} and {detector} share spatial id "
                    f"{cell[0]} and round {cell[1]}."
                )
            self._index[cell] = detector
        self.num_rounds = max(self.rounds) + 1 if self.rounds else 0

    @classmethod
    def from_detectors(cls, detectors: Sequence[DetectorInfo]) -> Optional["DetectorLattice"]:
        """Build the lattice, or return None when any detector lacks a round."""
        if not detectors or any(d.round is None or d.coords is None for d in detectors):
            return None
        spatial = sorted({d.spatial_coords for d in detectors})
        spatial_id = {coords: i for i, coords in enumerate(spatial)}
        try:
            return cls([spatial_id[d.spatial_coords] for d in detectors],
                       [d.round for d in detectors])
        except ValueError:
            return None

    def __len__(self):
        return len(self.spatial_ids)

    def __eq__(self, other):
        if not isinstance(other, DetectorLattice):
            return NotImplemented
        return self.spatial_ids == other.spatial_ids and self.rounds == other.rounds

    def __hash__(self):
        return hash((self.spatial_ids, self.rounds))

    def cell(self, detector: int) -> Tuple[int, int]:
        return self.spatial_ids[detector], self.rounds[detector]

    def index(self, spatial_id: int, round: int) -> Optional[int]:
        return self._index.get((spatial_id, round))

    def pattern(self, detectors: Sequence[int]) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
        """Split a detector set into its base round and relative (spatial id, round) cells."""
        cells = [self.cell(d) for d in detectors]
        base = min(r for _, r in cells)
        return base, tuple(sorted((s, r - base) for s, r in cells))

    def instantiate(
        self,
        pattern: Sequence[Tuple[int, int]],
        base_round: int,
    ) -> Optional[Tuple[int, ...]]:
        """Detector indices of ``pattern`` shifted to ``base_round``; None if a cell is missing."""
        indices = []
        for spatial_id, offset in pattern:
            index = self.index(spatial_id, base_round + offset)
            if index is None:
                return None
            indices.append(index)
        return tuple(sorted(indices))

    def to_list(self) -> List[List[int]]:
        return [[s, r] for s, r in zip(self.spatial_ids, self.rounds)]


@dataclass(frozen=True)
class DetectorErrorModel:
    """A flattened detector error model.

    Parameters
    ----------
    mechanisms : tuple of Mechanism
    detectors : tuple of DetectorInfo, length num_detectors
        ``detectors[i].index == i``.
    num_detectors : int
    num_observables : int
    rounds : int, optional
        Number of syndrome-measurement rounds, when every detector carries one.
    """
    mechanisms: Tuple[Mechanism, ...]
    detectors: Tuple[DetectorInfo, ...]
    num_detectors: int
    num_observables: int
    rounds: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "mechanisms", tuple(self.mechanisms))
        object.__setattr__(self, "detectors", tuple(self.detectors))
        if self.num_detectors < 0 or self.num_observables < 0:
            raise ValueError(
                "`num_detectors` and `num_observables` must be non-negative, got "
                f"{self.num_detectors} and {self.num_observables}."
            )
        if len(self.detectors) != self.num_detectors:
            raise ValueError(
                f"`detectors` must have length num_detectors={self.num_detectors}, "
                f"got {len(self.detectors)}."
            )
        for position, info in enumerate(self.detectors):
            if info.index != position:
                raise ValueError(f"`detectors[{position}]` has index {info.index}.")
        for mechanism in self.mechanisms:
            if mechanism.detectors[-1] >= self.num_detectors:
                raise ValueError(
                    f"mechanism detector {mechanism.detectors[-1]} is out of range for "
                    f"num_detectors={self.num_detectors}."
                )
            if mechanism.observables and mechanism.observables[-1] >= self.num_observables:
                raise ValueError(
                    f"mechanism observable {mechanism.observables[-1]} is out of range for "
                    f"num_observables={self.num_observables}."
                )
        if self.rounds is not None:
            if any(d.round is None or d.round >= self.rounds for d in self.detectors):
                raise ValueError(f"every detector must carry a round below rounds={self.rounds}.")

    @property
    def num_mechanisms(self) -> int:
        return len(self.mechanisms)

    def lattice(self) -> Optional[DetectorLattice]:
        """The (spatial id, round) lattice, or None without round metadata."""
        if self.rounds is None:
            return None
        return DetectorLattice.from_detectors(self.detectors)

    def check_matrix(self) -> sparse.csr_matrix:
        """Detector-by-mechanism incidence matrix, shape [num_detectors, num_mechanisms]."""
        return _incidence([m.detectors for m in self.mechanisms], self.num_detectors)

    def observable_matrix(self) -> sparse.csr_matrix:
        """Observable-by-mechanism incidence matrix, shape [num_observables, num_mechanisms]."""
        return _incidence([m.observables for m in self.mechanisms], self.num_observables)

    def probabilities(self) -> np.ndarray:
        return np.array([m.probability for m in self.mechanisms], dtype=np.float64)


def _incidence(columns: Sequence[Tuple[int, ...]], num_rows: int) -> sparse.csr_matrix:
    rows = [r for column in columns for r in column]
    cols = [j for j, column in enumerate(columns) for _ in column]
    data = np.ones(len(rows), dtype=np.uint8)
    return sparse.csr_matrix((data, (rows, cols)), shape=(num_rows, len(columns)), dtype=np.uint8)


def merge_duplicates(dem: DetectorErrorModel) -> DetectorErrorModel:
    """Merge mechanisms with identical detector and observable sets.

    Probabilities of duplicates are XOR-combined with a left fold in model order;
    provenance is unioned. The output is sorted by detector set then observable set.

    Parameters
    ----------
    dem : DetectorErrorModel

    Returns
    -------
    merged : DetectorErrorModel
    """
    merged: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Mechanism] = {}
    for mechanism in dem.mechanisms:
        previous = merged.get(mechanism.key)
        if previous is None:
            merged[mechanism.key] = mechanism
            continue
        merged[mechanism.key] = Mechanism(
            probability=xor_probability(previous.probability, mechanism.probability),
            detectors=mechanism.detectors,
            observables=mechanism.observables,
            source_ids=tuple(sorted(set(previous.source_ids) | set(mechanism.source_ids))),
        )
    mechanisms = tuple(merged[key] for key in sorted(merged))
    return replace(dem, mechanisms=mechanisms)


def structure_digest(dem: DetectorErrorModel) -> str:
    """SHA-256 digest of the model structure.

    Covers the mechanism detector and observable sets in canonical order, the
    detector and observable counts and the round lattice. Probabilities are not
    covered, so models differing only in noise strength share a digest.
    """
    lattice = dem.lattice()
    payload = {
        "mechanisms": sorted([list(m.detectors), list(m.observables)] for m in dem.mechanisms),
        "num_detectors": dem.num_detectors,
        "num_observables": dem.num_observables,
        "lattice": lattice.to_list() if lattice is not None else None,
    }
    encoded = json.dumps(payload, separators=(",", ":"), sort_keys=True).encode("utf-8")
    return hashlib.sha256(encoded).hexdigest()
