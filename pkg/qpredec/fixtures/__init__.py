import functools
import os

from qpredec.dem.circuits import surface_code_dem
from qpredec.dem.codes import load_code_spec
from qpredec.dem.text import load_dem

MODULE_PATH = os.path.dirname(__file__)

REPETITION_CODE_PATH = os.path.join(MODULE_PATH, "repetition_n3.json")
STEANE_CODE_PATH = os.path.join(MODULE_PATH, "steane.json")
SURFACE_D3_CODE_PATH = os.path.join(MODULE_PATH, "surface_d3.json")
REPETITION_DEM_PATH = os.path.join(MODULE_PATH, "repetition_n3_r3.dem")

CODE_SPEC_PATHS = {
    "repetition": REPETITION_CODE_PATH,
    "steane": STEANE_CODE_PATH,
    "surface_d3": SURFACE_D3_CODE_PATH,
}


def load_repetition_code():
    return load_code_spec(REPETITION_CODE_PATH)


def load_steane_code():
    return load_code_spec(STEANE_CODE_PATH)


def load_surface_d3_code():
    return load_code_spec(SURFACE_D3_CODE_PATH)


def load_repetition_dem():
    return load_dem(REPETITION_DEM_PATH)


@functools.lru_cache(maxsize=None)
def load_surface_d3_circuit_dem():
    """Circuit-level rotated d=3 memory-Z model over 3 rounds at p=1e-3.

    Generated by Stim on first use: 24 detectors and 1 observable.
    """
    return surface_code_dem(distance=3, rounds=3, p=1e-3, task="rotated_memory_z")
