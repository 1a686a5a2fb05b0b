"""Phenomenological noise models for CSS codes.

Detectors compare consecutive measurements of each check. Data errors register in
the round they occur in only; the last round is a perfect readout round.
"""
import json
import logging
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from qpredec.dem.codes import CssCodeSpec
from qpredec.dem.model import (
    DetectorErrorModel,
    DetectorInfo,
    Mechanism,
    UndetectableMechanismError,
)

logger = logging.getLogger(__name__)

MECHANISM_KINDS = ("data", "measurement", "hook")


@dataclass(frozen=True)
class NoiseConfig:
    """Phenomenological noise strengths.

    Parameters
    ----------
    p_data : float
        Data-qubit error probability per round.
    p_meas : float
        Measurement error probability per check and round.
    p_hook : float, default=0.
        Probability of the synthetic two-qubit hook channel.
    rounds : int, default=1
        Number of syndrome-measurement rounds.
    """
    p_data: float
    p_meas: float = 0.
    p_hook: float = 0.
    rounds: int = 1

    def __post_init__(self):
        for name in ("p_data", "p_meas", "p_hook"):
            value = getattr(self, name)
            if not 0. <= value < 1.:
                raise ValueError(f"`{name}` must be in [0, 1), got {value}.")
        if self.rounds < 1:
            raise ValueError(f"`rounds` must be >= 1, got {self.rounds}.")

    def scaled(self, p_data: float) -> "NoiseConfig":
        """Same channels with ``p_data`` replaced; ``p_meas`` and ``p_hook`` keep their ratio."""
        if self.p_data == 0.:
            raise ValueError("cannot rescale a noise model with `p_data` = 0.")
        ratio = p_data / self.p_data
        return NoiseConfig(p_data, self.p_meas * ratio, self.p_hook * ratio, self.rounds)

    def to_dict(self) -> dict:
        return {"p_data": self.p_data, "p_meas": self.p_meas, "p_hook": self.p_hook,
                "rounds": self.rounds}


def _support(matrix: np.ndarray, column: int) -> List[int]:
    return np.flatnonzero(matrix[:, column]).tolist()


def _channels(code: CssCodeSpec, sector: str, noise: NoiseConfig):
    """Yield (kind, probability, detectors, observables) in model order."""
    checks, logicals = code.sector_matrices(sector)
    m = checks.shape[0]

    def stamp(qubit: int, round: int):
        return {round * m + c for c in _support(checks, qubit)}

    if noise.p_data > 0.:
        for t in range(noise.rounds):
            for q in range(code.n):
                yield "data", noise.p_data, stamp(q, t), set(_support(logicals, q))
    if noise.p_meas > 0.:
        for t in range(noise.rounds - 1):
            for c in range(m):
                yield "measurement", noise.p_meas, {t * m + c, (t + 1) * m + c}, set()
    if noise.p_hook > 0.:
        for c in range(m):
            support = np.flatnonzero(checks[c]).tolist()
            for q1, q2 in zip(support, support[1:]):
                observables = set(_support(logicals, q1)) ^ set(_support(logicals, q2))
                for t in range(noise.rounds - 1):
                    yield "hook", noise.p_hook, stamp(q1, t) ^ stamp(q2, t + 1), observables


def _build(code: CssCodeSpec, sector: str, noise: NoiseConfig):
    if noise.rounds < 2 and (noise.p_meas > 0. or noise.p_hook > 0.):
        raise ValueError(
            f"`rounds` must be >= 2 when p_meas or p_hook is positive, got {noise.rounds}."
        )
    checks, logicals = code.sector_matrices(sector)
    m = checks.shape[0]
    mechanisms: List[Mechanism] = []
    kinds: Dict[int, str] = {}
    for kind, probability, detectors, observables in _channels(code, sector, noise):
        if not detectors:
            if observables:
                raise UndetectableMechanismError(
                    f"{kind} mechanism flips observables {sorted(observables)} of code "
                    f"{code.name!r} without any detector."
                )
            continue
        kinds[len(mechanisms)] = kind
        mechanisms.append(Mechanism(
            probability=probability,
            detectors=sorted(detectors),
            observables=sorted(observables),
            source_ids=(len(mechanisms),),
        ))
    detectors = tuple(
        DetectorInfo(index=t * m + c, coords=(float(c), float(t)), round=t)
        for t in range(noise.rounds)
        for c in range(m)
    )
    dem = DetectorErrorModel(
        mechanisms=tuple(mechanisms),
        detectors=detectors,
        num_detectors=noise.rounds * m,
        num_observables=logicals.shape[0],
        rounds=noise.rounds,
    )
    return dem, kinds


def build_phenomenological_dem(
    code: CssCodeSpec,
    sector: str,
    noise: NoiseConfig,
) -> DetectorErrorModel:
    """Build the detector error model of a memory experiment under phenomenological noise.

    Parameters
    ----------
    code : CssCodeSpec
    sector : {"X", "Z"}
        The Z sector decodes X data errors with ``hz`` and ``lz``; X is symmetric.
    noise : NoiseConfig

    Returns
    -------
    dem : DetectorErrorModel
        Detector ``t * m + c`` is check ``c`` at round ``t`` with coordinates
        ``(c, t)``. Mechanisms are ordered data, measurement, hook. The model is not
        merged; duplicates are left to :func:`merge_duplicates`.

    Raises
    ------
    UndetectableMechanismError
        If a qubit flips a logical observable without touching any check.
    """
    dem, _ = _build(code, sector, noise)
    logger.info("built %d mechanisms for %s (%s sector, %d rounds)", dem.num_mechanisms,
                code.name, sector, noise.rounds)
    return dem


def build_phenomenological_sidecar(
    code: CssCodeSpec,
    sector: str,
    noise: NoiseConfig,
) -> Dict[int, str]:
    """Mechanism kinds of :func:`build_phenomenological_dem`'s model.

    Returns
    -------
    sidecar : dict of int to str
        Mechanism index to one of "data", "measurement", "hook".
    """
    _, kinds = _build(code, sector, noise)
    return kinds


def load_sidecar(path) -> Dict[int, str]:
    """Read a JSON sidecar mapping mechanism index to mechanism kind."""
    with open(path, "r", encoding="utf-8") as f:
        raw = json.load(f)
    sidecar = {}
    for key, kind in raw.items():
        if kind not in MECHANISM_KINDS:
            raise ValueError(f"sidecar kind must be one of {MECHANISM_KINDS}, got {kind!r}.")
        sidecar[int(key)] = kind
    return sidecar


def sidecar_to_json(sidecar: Dict[int, str]) -> Dict[str, str]:
    return {str(k): v for k, v in sorted(sidecar.items())}
