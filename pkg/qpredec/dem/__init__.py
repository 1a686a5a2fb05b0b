"""Detector error models: types, text format, CSS code specs, noise builders and circuits."""
from qpredec.dem.model import (
    DetectorErrorModel,
    DetectorInfo,
    DetectorLattice,
    Mechanism,
    UndetectableMechanismError,
    merge_duplicates,
    structure_digest,
)
from qpredec.dem.text import (
    DemSyntaxError,
    dem_from_stim,
    dem_to_stim,
    load_dem,
    parse_dem,
    save_dem,
    serialize_dem,
)
from qpredec.dem.circuits import surface_code_circuit, surface_code_dem
from qpredec.dem.codes import CssCodeSpec, load_code_spec, repetition_code
from qpredec.dem.noise import (
    NoiseConfig,
    build_phenomenological_dem,
    build_phenomenological_sidecar,
    load_sidecar,
)

__all__ = [
    "CssCodeSpec",
    "DemSyntaxError",
    "DetectorErrorModel",
    "DetectorInfo",
    "DetectorLattice",
    "Mechanism",
    "NoiseConfig",
    "UndetectableMechanismError",
    "build_phenomenological_dem",
    "build_phenomenological_sidecar",
    "dem_from_stim",
    "dem_to_stim",
    "load_code_spec",
    "load_dem",
    "load_sidecar",
    "merge_duplicates",
    "parse_dem",
    "repetition_code",
    "save_dem",
    "serialize_dem",
    "structure_digest",
    "surface_code_circuit",
    "surface_code_dem",
]
