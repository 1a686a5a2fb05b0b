"""Circuit-level detector error models from Stim's generated surface-code circuits."""
import logging

import stim

from qpredec.dem.model import DetectorErrorModel
from qpredec.dem.text import dem_from_stim

logger = logging.getLogger(__name__)

SURFACE_CODE_TASKS = ("rotated_memory_x", "rotated_memory_z")


def surface_code_circuit(
    distance: int = 3,
    rounds: int = 3,
    p: float = 1e-3,
    task: str = "rotated_memory_z",
) -> stim.Circuit:
    """Noisy rotated surface-code memory circuit with SI1000-like strengths.

    Two-qubit Clifford gates depolarize with ``p``, idling data qubits with
    ``p / 10`` per round, measurements flip with ``5 p`` and resets with ``2 p``.

    Parameters
    ----------
    distance : int, default=3
    rounds : int, default=3
    p : float, default=1e-3
        Base physical error rate.
    task : str, default="rotated_memory_z"
        One of :data:`SURFACE_CODE_TASKS`.
    """
    if task not in SURFACE_CODE_TASKS:
        raise ValueError(f"`task` must be one of {SURFACE_CODE_TASKS}, got {task!r}.")
    if distance < 2 or rounds < 1:
        raise ValueError(f"`distance` must be >= 2 and `rounds` >= 1, got {distance} and "
                         f"{rounds}.")
    if not 0. < 5 * p < 1.:
        raise ValueError(f"`p` must be in (0, 0.2), got {p}.")
    return stim.Circuit.generated(
        f"surface_code:{task}",
        distance=distance,
        rounds=rounds,
        after_clifford_depolarization=p,
        before_round_data_depolarization=p / 10,
        before_measure_flip_probability=5 * p,
        after_reset_flip_probability=2 * p,
    )


def surface_code_dem(
    distance: int = 3,
    rounds: int = 3,
    p: float = 1e-3,
    task: str = "rotated_memory_z",
) -> DetectorErrorModel:
    """Detector error model of :func:`surface_code_circuit`, errors decomposed by Stim."""
    circuit = surface_code_circuit(distance, rounds, p, task)
    dem = dem_from_stim(circuit.detector_error_model(decompose_errors=True))
    logger.debug("surface code d=%d r=%d p=%g: %d detectors, %d mechanisms", distance, rounds,
                 p, dem.num_detectors, dem.num_mechanisms)
    return dem
