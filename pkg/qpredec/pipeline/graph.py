"""Conflict graphs over the primitives of one class."""
import logging
from dataclasses import dataclass
from itertools import combinations, islice
from typing import Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

import networkx as nx

from qpredec.dem.model import DetectorLattice
from qpredec.primitives import Primitive

logger = logging.getLogger(__name__)

MAX_ENUMERATED_CLIQUES = 10_000


def footprint(primitive: Primitive, lattice: Optional[DetectorLattice] = None) -> FrozenSet:
    """Hardware resources a primitive reads and clears.

    With a lattice the footprint is the set of spatial ids: shiftable primitives are
    applied at every round offset and meet on any shared check. Primitives at an
    absolute position get the same footprint, an over-approximation of their
    conflicts. Without a lattice it is the syndrome set itself.
    """
    if lattice is None:
        return frozenset(primitive.syndrome_set)
    return frozenset(lattice.cell(d)[0] for d in primitive.syndrome_set)


@dataclass(frozen=True, eq=False)
class ConflictGraph:
    """Undirected conflict graph.

    Parameters
    ----------
    graph : networkx.Graph
        Nodes are primitive ids; an edge joins primitives with intersecting footprints.
    cliques : tuple of tuple of int
        Discovered cliques, each sorted.
    omega_lb : int
        Size of the largest discovered clique, a lower bound on the chromatic number.
    """
    graph: nx.Graph
    cliques: Tuple[Tuple[int, ...], ...]
    omega_lb: int

    @property
    def nodes(self) -> List[int]:
        return sorted(self.graph.nodes)

    @property
    def num_edges(self) -> int:
        return self.graph.number_of_edges()

    def max_clique(self) -> Tuple[int, ...]:
        """The first discovered clique of maximum size."""
        for clique in self.cliques:
            if len(clique) == self.omega_lb:
                return clique
        return ()


def conflict_graph_from_edges(
    nodes: Sequence[int],
    edges: Sequence[Tuple[int, int]],
    groups: Sequence[Sequence[int]] = (),
    max_cliques: int = MAX_ENUMERATED_CLIQUES,
) -> ConflictGraph:
    """Build a conflict graph from explicit edges and discover cliques.

    Parameters
    ----------
    nodes : sequence of int
    edges : sequence of (int, int)
    groups : sequence of sequence of int, optional
        Node groups known to be cliques, recorded before enumeration.
    max_cliques : int, default=10000
        Cap on maximal cliques enumerated.
    """
    graph = nx.Graph()
    graph.add_nodes_from(sorted(nodes))
    graph.add_edges_from(edges)

    seen = set()
    cliques: List[Tuple[int, ...]] = []

    def record(clique):
        clique = tuple(sorted(clique))
        if clique and clique not in seen:
            seen.add(clique)
            cliques.append(clique)

    for group in groups:
        record(group)
    for clique in islice(nx.find_cliques(graph), max_cliques):
        record(clique)
    omega_lb = max((len(c) for c in cliques), default=0)
    return ConflictGraph(graph=graph, cliques=tuple(cliques), omega_lb=omega_lb)


def build_conflict_graph(
    primitives: Dict[int, Primitive],
    lattice: Optional[DetectorLattice] = None,
    max_cliques: int = MAX_ENUMERATED_CLIQUES,
) -> ConflictGraph:
    """Build the conflict graph of one class.

    Parameters
    ----------
    primitives : dict of int to Primitive
        Primitives of one class keyed by primitive id.
    lattice : DetectorLattice, optional
        Given for round-pruned sets; switches footprints to spatial ids.
    max_cliques : int, default=10000
        Cap on maximal cliques enumerated after per-resource grouping.

    Returns
    -------
    graph : ConflictGraph
    """
    classes = {p.primitive_class for p in primitives.values()}
    if len(classes) > 1:
        raise ValueError(f"`primitives` must belong to one class, got {sorted(map(str, classes))}.")
    users: Dict[Hashable, List[int]] = {}
    for pid in sorted(primitives):
        for resource in footprint(primitives[pid], lattice):
            users.setdefault(resource, []).append(pid)
    edges = {pair for group in users.values() for pair in combinations(group, 2)}
    groups = [users[key] for key in sorted(users)]
    conflict = conflict_graph_from_edges(list(primitives), sorted(edges), groups, max_cliques)
    logger.debug("conflict graph: %d nodes, %d edges, omega >= %d", len(primitives),
                 conflict.num_edges, conflict.omega_lb)
    return conflict
