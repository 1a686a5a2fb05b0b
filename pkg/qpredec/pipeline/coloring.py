"""Colouring conflict graphs: greedy heuristics, exact search and the hybrid of both.

A colour is a pipeline stage, so fewer colours mean a shallower pipeline.
"""
import functools
import logging
import os
import time
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

import networkx as nx

from qpredec.pipeline.graph import ConflictGraph

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60.
TIMEOUT_ENV = "QPREDEC_TIMEOUT"

GREEDY_HEURISTICS = (
    "largest-first",
    "smallest-last",
    "DSATUR",
    "random-sequential",
    "connected-sequential",
    "independent-set",
)

_NX_STRATEGIES = {
    "largest-first": "largest_first",
    "smallest-last": "smallest_last",
    "DSATUR": "saturation_largest_first",
    "connected-sequential": "connected_sequential_bfs",
    "independent-set": "independent_set",
}


def default_timeout() -> float:
    """Solver timeout in seconds, overridable through ``QPREDEC_TIMEOUT``."""
    value = os.environ.get(TIMEOUT_ENV)
    if value is None:
        return DEFAULT_TIMEOUT
    try:
        timeout = float(value)
    except ValueError:
        raise ValueError(f"`{TIMEOUT_ENV}` must be a number of seconds, got {value!r}.")
    if timeout < 0:
        raise ValueError(f"`{TIMEOUT_ENV}` must be >= 0, got {timeout}.")
    return timeout


@dataclass(frozen=True)
class Coloring:
    """A colour per node.

    Parameters
    ----------
    assignment : dict of int to int
        Node id to colour index, contiguous from 0.
    num_colors : int
    method : str
        Heuristic name, "exact" or "hybrid-fallback".
    heuristic : str, optional
        Greedy heuristic behind a "hybrid-fallback" colouring.
    """
    assignment: Mapping[int, int]
    num_colors: int
    method: str
    heuristic: Optional[str] = None

    def groups(self) -> List[List[int]]:
        """Nodes of each colour, ascending, colour 0 first."""
        groups: List[List[int]] = [[] for _ in range(self.num_colors)]
        for node in sorted(self.assignment):
            groups[self.assignment[node]].append(node)
        return groups


def _normalized(assignment: Mapping[int, int]) -> Dict[int, int]:
    """Relabel colours 0.. in order of first use over ascending nodes."""
    relabel: Dict[int, int] = {}
    normalized = {}
    for node in sorted(assignment):
        color = assignment[node]
        if color not in relabel:
            relabel[color] = len(relabel)
        normalized[node] = relabel[color]
    return normalized


def _coloring(assignment: Mapping[int, int], method: str, heuristic: Optional[str] = None):
    assignment = _normalized(assignment)
    return Coloring(assignment, len(set(assignment.values())), method, heuristic)


def is_proper(graph: nx.Graph, coloring: Coloring) -> bool:
    """Whether every node is coloured, colours are contiguous and no edge is monochrome."""
    if set(coloring.assignment) != set(graph.nodes):
        return False
    if set(coloring.assignment.values()) != set(range(coloring.num_colors)):
        return False
    return all(coloring.assignment[u] != coloring.assignment[v] for u, v in graph.edges)


def greedy_color(conflict: ConflictGraph, heuristic: str = "DSATUR", seed: int = 0) -> Coloring:
    """Colour with one of the networkx greedy strategies.

    Parameters
    ----------
    conflict : ConflictGraph
    heuristic : str, default="DSATUR"
        One of :data:`GREEDY_HEURISTICS`.
    seed : int, default=0
        Seed of "random-sequential"; ignored by the other heuristics.
    """
    if heuristic not in GREEDY_HEURISTICS:
        raise ValueError(f"`heuristic` must be one of {GREEDY_HEURISTICS}, got {heuristic!r}.")
    strategy = _NX_STRATEGIES.get(heuristic)
    if strategy is None:
        strategy = functools.partial(nx.coloring.strategy_random_sequential, seed=seed)
    assignment = nx.greedy_color(conflict.graph, strategy=strategy)
    return _coloring(assignment, heuristic)


@dataclass(frozen=True)
class ExactResult:
    """Outcome of :func:`exact_color`.

    ``status`` is "found" (``coloring`` set), "exhausted" (no colouring with ``k``
    colours exists) or "timeout".
    """
    status: str
    k: int
    coloring: Optional[Coloring] = None
    nodes_explored: int = 0


class _Timeout(Exception):
    pass


class _ExactSearch:
    """Backtracking k-colouring over bitmask domains.

    Assigning a colour removes it from neighbour domains; every discovered clique
    is an all-different constraint checked by pigeonhole, and in cliques of exactly
    k nodes a colour left in a single member's domain is forced there.
    """

    def __init__(self, conflict: ConflictGraph, k: int, deadline: float):
        self.k = k
        self.deadline = deadline
        self.nodes = conflict.nodes
        position = {v: i for i, v in enumerate(self.nodes)}
        self.neighbors = [[position[u] for u in conflict.graph.neighbors(v)] for v in self.nodes]
        self.degree = [len(n) for n in self.neighbors]
        self.cliques = [[position[v] for v in c] for c in conflict.cliques if len(c) > 1]
        self.node_cliques: List[List[int]] = [[] for _ in self.nodes]
        for ci, clique in enumerate(self.cliques):
            for v in clique:
                self.node_cliques[v].append(ci)
        self.anchor = [position[v] for v in conflict.max_clique()]
        self.explored = 0

    def _check_time(self):
        if time.monotonic() > self.deadline:
            raise _Timeout()

    def _assign(self, domains: List[int], colors: List[int], node: int, color: int) -> bool:
        """Assign and propagate in place; False on a wipe-out."""
        pending = [(node, color)]
        while pending:
            v, c = pending.pop()
            if colors[v] == c:
                continue
            if colors[v] != -1 or not domains[v] >> c & 1:
                return False
            colors[v] = c
            domains[v] = 1 << c
            mask = ~(1 << c)
            for u in self.neighbors[v]:
                if colors[u] != -1:
                    if colors[u] == c:
                        return False
                    continue
                domains[u] &= mask
                if domains[u] == 0:
                    return False
                if domains[u] & (domains[u] - 1) == 0:
                    pending.append((u, domains[u].bit_length() - 1))
            for ci in self.node_cliques[v]:
                forced = self._clique_forced(domains, colors, self.cliques[ci])
                if forced is None:
                    return False
                pending.extend(forced)
        return True

    def _clique_forced(self, domains, colors, clique):
        """Pigeonhole check and hidden singles of one clique; None if infeasible."""
        open_nodes = [v for v in clique if colors[v] == -1]
        available = 0
        for v in open_nodes:
            available |= domains[v]
        if bin(available).count("1") < len(open_nodes):
            return None
        forced = []
        if len(clique) == self.k and open_nodes:
            used = 0
            for v in clique:
                if colors[v] != -1:
                    used |= 1 << colors[v]
            for c in range(self.k):
                if used >> c & 1:
                    continue
                holders = [v for v in open_nodes if domains[v] >> c & 1]
                if not holders:
                    return None
                if len(holders) == 1:
                    forced.append((holders[0], c))
        return forced

    def _select(self, domains, colors) -> Optional[int]:
        best, best_key = None, None
        for v, color in enumerate(colors):
            if color != -1:
                continue
            key = (bin(domains[v]).count("1"), -self.degree[v], v)
            if best_key is None or key < best_key:
                best, best_key = v, key
        return best

    def run(self) -> ExactResult:
        n = len(self.nodes)
        domains = [(1 << self.k) - 1] * n
        colors = [-1] * n
        for color, v in enumerate(self.anchor):
            if color >= self.k or not self._assign(domains, colors, v, color):
                return ExactResult("exhausted", self.k, nodes_explored=self.explored)
        # Each frame: (domains, colors, node, colours still to try).
        stack = []
        node = self._select(domains, colors)
        if node is not None:
            stack.append((domains, colors, node, self._colors_of(domains[node])))
        else:
            return self._found(colors)
        while stack:
            self._check_time()
            domains, colors, node, remaining = stack[-1]
            if not remaining:
                stack.pop()
                continue
            color = remaining.pop(0)
            self.explored += 1
            child_domains, child_colors = list(domains), list(colors)
            if not self._assign(child_domains, child_colors, node, color):
                continue
            nxt = self._select(child_domains, child_colors)
            if nxt is None:
                return self._found(child_colors)
            stack.append((child_domains, child_colors, nxt, self._colors_of(child_domains[nxt])))
        return ExactResult("exhausted", self.k, nodes_explored=self.explored)

    def _colors_of(self, domain: int) -> List[int]:
        return [c for c in range(self.k) if domain >> c & 1]

    def _found(self, colors) -> ExactResult:
        coloring = _coloring({v: colors[i] for i, v in enumerate(self.nodes)}, "exact")
        return ExactResult("found", self.k, coloring, self.explored)


def exact_color(conflict: ConflictGraph, k: int, timeout: float = DEFAULT_TIMEOUT) -> ExactResult:
    """Search for a proper colouring with at most ``k`` colours.

    Nodes are branched on in DSATUR order (smallest domain, then highest degree,
    then lowest id) and colours in ascending order; a maximum discovered clique is
    pre-coloured ``0..|C|-1``. The search is deterministic.

    Parameters
    ----------
    conflict : ConflictGraph
    k : int
        Number of colours available.
    timeout : float, default=60.
        Seconds; the search checks the clock between branches.

    Returns
    -------
    result : ExactResult
    """
    if k < 0:
        raise ValueError(f"`k` must be non-negative, got {k}.")
    if timeout <= 0:
        return ExactResult("timeout", k)
    if conflict.graph.number_of_nodes() == 0:
        return ExactResult("found", k, Coloring({}, 0, "exact"))
    if k < conflict.omega_lb:
        return ExactResult("exhausted", k)
    search = _ExactSearch(conflict, k, time.monotonic() + timeout)
    try:
        result = search.run()
    except _Timeout:
        result = ExactResult("timeout", k, nodes_explored=search.explored)
    logger.debug("exact colouring with k=%d: %s after %d branches", k, result.status,
                 result.nodes_explored)
    return result


def best_greedy(conflict: ConflictGraph, seed: int = 0) -> Coloring:
    """Fewest-colour result of the greedy suite; earlier heuristics win ties."""
    results = [greedy_color(conflict, h, seed) for h in GREEDY_HEURISTICS]
    return min(results, key=lambda c: c.num_colors)


def hybrid_color(
    conflict: ConflictGraph,
    timeout: float = DEFAULT_TIMEOUT,
    seed: int = 0,
) -> Coloring:
    """Exact colouring within a time budget, greedy otherwise.

    Exact search runs for ``k = omega_lb, omega_lb + 1, ...`` up to the best greedy
    count while time remains; the first colouring found is returned with method
    "exact". When the budget runs out first, the best greedy colouring is returned
    with method "hybrid-fallback".

    Parameters
    ----------
    conflict : ConflictGraph
    timeout : float, default=60.
        Total seconds for all exact attempts.
    seed : int, default=0
        Seed of the random-sequential heuristic.
    """
    if conflict.graph.number_of_nodes() == 0:
        return Coloring({}, 0, "exact")
    deadline = time.monotonic() + timeout
    greedy = best_greedy(conflict, seed)
    for k in range(max(conflict.omega_lb, 1), greedy.num_colors + 1):
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            break
        result = exact_color(conflict, k, remaining)
        if result.status == "found":
            return result.coloring
        if result.status == "timeout":
            break
    logger.info("exact colouring timed out; using %s with %d colours", greedy.method,
                greedy.num_colors)
    return Coloring(dict(greedy.assignment), greedy.num_colors, "hybrid-fallback",
                    heuristic=greedy.method)


def reorder_colors(coloring: Coloring, sizes: Mapping[int, int]) -> Coloring:
    """Renumber colours so groups holding larger syndrome sets come first.

    Groups are ordered by descending largest member size, then descending member
    count, then original colour. Properness and colour count are unchanged.

    Parameters
    ----------
    coloring : Coloring
    sizes : mapping of int to int
        ``|S|`` of every coloured node.
    """
    groups = coloring.groups()
    order = sorted(
        range(len(groups)),
        key=lambda c: (-max(sizes[v] for v in groups[c]), -len(groups[c]), c),
    )
    rank = {old: new for new, old in enumerate(order)}
    assignment = {v: rank[c] for v, c in coloring.assignment.items()}
    return Coloring(assignment, coloring.num_colors, coloring.method, coloring.heuristic)

