import functools

import networkx as nx

from qpredec.dem import NoiseConfig, build_phenomenological_dem
from qpredec.fixtures import load_surface_d3_circuit_dem, load_surface_d3_code
from qpredec.pipeline import compile_pipeline
from qpredec.pipeline.graph import build_conflict_graph, conflict_graph_from_edges
from tests.dem.common import REPETITION_DEM, STEANE_DEM

TIMEOUT = 10.

REPETITION_PIPELINE, REPETITION_REPORT = compile_pipeline(REPETITION_DEM, timeout=TIMEOUT,
                                                          code="repetition-3")
STEANE_PIPELINE, STEANE_REPORT = compile_pipeline(STEANE_DEM, timeout=TIMEOUT, code="steane")

SURFACE_NOISE = NoiseConfig(p_data=1e-3, p_meas=1e-3, rounds=3)


@functools.lru_cache(maxsize=None)
def surface_pipeline():
    """Phenomenological rotated d=3 surface code; (pipeline, report)."""
    dem = build_phenomenological_dem(load_surface_d3_code(), "Z", SURFACE_NOISE)
    return compile_pipeline(dem, timeout=TIMEOUT, code="surface-d3")


@functools.lru_cache(maxsize=None)
def surface_circuit_pipeline():
    """Circuit-level rotated d=3 surface code; (pipeline, report)."""
    return compile_pipeline(load_surface_d3_circuit_dem(), timeout=TIMEOUT,
                            code="surface-d3-circuit")


def fixture_pipelines():
    return [
        ("repetition", REPETITION_PIPELINE),
        ("steane", STEANE_PIPELINE),
        ("surface", surface_pipeline()[0]),
        ("surface-circuit", surface_circuit_pipeline()[0]),
    ]


def class_conflict_graphs(pipeline):
    """Yield (class, conflict graph) for every class of an assembled pipeline."""
    for primitive_class in pipeline.class_priorities:
        members = {i: p for i, p in enumerate(pipeline.primitives)
                   if p.primitive_class == primitive_class}
        yield primitive_class, build_conflict_graph(members, pipeline.lattice)


def conflict_graph(graph: nx.Graph):
    return conflict_graph_from_edges(list(graph.nodes), list(graph.edges))


def odd_wheel():
    """5-cycle plus an apex: clique number 3, chromatic number 4."""
    graph = nx.cycle_graph(5)
    graph.add_edges_from((5, v) for v in range(5))
    return graph
