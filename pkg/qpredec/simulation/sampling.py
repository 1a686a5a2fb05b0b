"""Fault sampling for Monte-Carlo experiments.

Shot ``i`` of an experiment with seed ``s`` fires each mechanism independently from
``np.random.default_rng([s, i])``, so a shot does not depend on the batch or worker
that draws it.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import sparse

from qpredec.dem.model import DetectorErrorModel


@dataclass(frozen=True, eq=False)
class Shot:
    """One sampled fault configuration.

    ``syndrome`` and ``true_observable_flips`` are the XOR of the detector and
    observable stamps of the fired mechanisms.
    """
    fired_mechanisms: np.ndarray
    syndrome: np.ndarray
    true_observable_flips: np.ndarray


class FaultSampler(ABC):
    """A distribution over fault configurations.

    Every shot is drawn from its own generator seeded with ``(seed, index)``, so a
    shot does not depend on which other shots are drawn or in which order.
    """

    @property
    @abstractmethod
    def M(self):
        """
        Number of mechanisms per shot.
        """

    @abstractmethod
    def sample(
        self,
        seed: int,
        start: int,
        num_shots: int = 1,
    ):
        """Sample shots ``start .. start + num_shots - 1``.

        Parameters
        ----------
        seed : int
            Experiment seed, non-negative.
        start : int
            Index of the first shot.
        num_shots : int, default=1
            Number of shots.

        Returns
        -------
        fired : ndarray, shape [num_shots, self.M], dtype bool
        syndromes : ndarray, shape [num_shots, num_detectors], dtype uint8
        observable_flips : ndarray, shape [num_shots, num_observables], dtype uint8
        """


class MechanismSampler(FaultSampler):
    """Independent firing of detector error model mechanisms.

    Parameters
    ----------
    probabilities : array-like, shape [M]
        Firing probability of each mechanism, in [0, 1].
    check_matrix : sparse matrix, shape [num_detectors, M]
    observable_matrix : sparse matrix, shape [num_observables, M]
    """

    def __init__(self, probabilities, check_matrix, observable_matrix):
        probabilities = np.asarray(probabilities, dtype=np.float64)
        if probabilities.ndim != 1:
            raise ValueError(f"`probabilities` shape must be (M,), got {probabilities.shape}.")
        if ((probabilities < 0.) | (probabilities > 1.)).any():
            raise ValueError("`probabilities` must lie in [0, 1].")
        check_matrix = sparse.csr_matrix(check_matrix, dtype=np.int32)
        observable_matrix = sparse.csr_matrix(observable_matrix, dtype=np.int32)
        if check_matrix.shape[1] != probabilities.shape[0]:
            raise ValueError(
                f"`check_matrix` must have {probabilities.shape[0]} columns, "
                f"got {check_matrix.shape[1]}."
            )
        if observable_matrix.shape[1] != probabilities.shape[0]:
            raise ValueError(
                f"`observable_matrix` must have {probabilities.shape[0]} columns, "
                f"got {observable_matrix.shape[1]}."
            )
        self.probabilities = probabilities
        self.check_matrix = check_matrix
        self.observable_matrix = observable_matrix

    @classmethod
    def from_dem(cls, dem: DetectorErrorModel) -> "MechanismSampler":
        return cls(dem.probabilities(), dem.check_matrix(), dem.observable_matrix())

    @property
    def M(self):
        return self.probabilities.shape[0]

    def _fire(self, seed: int, index: int) -> np.ndarray:
        rng = np.random.default_rng([seed, index])
        return rng.random(self.M) < self.probabilities

    def stamps(self, fired: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """XOR-accumulated detector and observable stamps of fired mechanisms."""
        fired = sparse.csr_matrix(np.atleast_2d(fired).astype(np.int32))
        syndromes = (fired @ self.check_matrix.T).toarray() % 2
        flips = (fired @ self.observable_matrix.T).toarray() % 2
        return syndromes.astype(np.uint8), flips.astype(np.uint8)

    def sample(self, seed: int, start: int, num_shots: int = 1):
        if seed < 0:
            raise ValueError(f"`seed` must be non-negative, got {seed}.")
        if start < 0 or num_shots < 0:
            raise ValueError(f"`start` and `num_shots` must be non-negative, got {start}, "
                             f"{num_shots}.")
        fired = np.zeros((num_shots, self.M), dtype=bool)
        for row, index in enumerate(range(start, start + num_shots)):
            fired[row] = self._fire(seed, index)
        syndromes, flips = self.stamps(fired)
        return fired, syndromes, flips


def sample_shot(sampler: MechanismSampler, seed: int, index: int) -> Shot:
    """Draw shot ``index`` of the experiment with the given seed."""
    fired, syndromes, flips = sampler.sample(seed, index, 1)
    return Shot(fired[0].astype(np.uint8), syndromes[0], flips[0])
