"""Second-level decoders over the Tanner graph of a detector error model."""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import torch

from qpredec.dem.model import DetectorErrorModel

LLR_CLAMP = 30.
MIN_SUM_SCALING = 0.9
MLE_MAX_MECHANISMS = 24
MLE_TIE_TOLERANCE = 1e-9


class TannerGraph:
    """Detectors as check nodes and mechanisms as variable nodes.

    Parameters
    ----------
    check_matrix : array-like, shape [num_detectors, num_mechanisms]
        Binary incidence of mechanisms on detectors.
    observable_matrix : array-like, shape [num_observables, num_mechanisms]
    probabilities : array-like, shape [num_mechanisms]
    """

    def __init__(self, check_matrix, observable_matrix, probabilities):
        self.H = np.asarray(check_matrix, dtype=np.uint8)
        self.L = np.asarray(observable_matrix, dtype=np.uint8)
        self.probabilities = np.asarray(probabilities, dtype=np.float64)
        if self.H.ndim != 2 or self.L.ndim != 2:
            raise ValueError("`check_matrix` and `observable_matrix` must be 2-dimensional.")
        if not (self.H.shape[1] == self.L.shape[1] == self.probabilities.shape[0]):
            raise ValueError(
                f"mechanism counts disagree: H {self.H.shape}, L {self.L.shape}, "
                f"probabilities {self.probabilities.shape}."
            )
        p = np.clip(self.probabilities, 1e-300, 1. - 1e-16)
        self.priors = np.clip(np.log((1. - p) / p), -LLR_CLAMP, LLR_CLAMP)  # [n]
        checks, variables = np.nonzero(self.H)
        self.edge_checks = torch.from_numpy(checks.astype(np.int64))  # [E]
        self.edge_variables = torch.from_numpy(variables.astype(np.int64))  # [E]

    @classmethod
    def from_dem(cls, dem: DetectorErrorModel) -> "TannerGraph":
        return cls(dem.check_matrix().toarray(), dem.observable_matrix().toarray(),
                   dem.probabilities())

    @property
    def num_checks(self) -> int:
        return self.H.shape[0]

    @property
    def num_variables(self) -> int:
        return self.H.shape[1]

    def syndrome_of(self, errors: np.ndarray) -> np.ndarray:
        """Syndromes of error patterns, shape [..., num_checks]."""
        return (np.asarray(errors, dtype=np.int64) @ self.H.T.astype(np.int64) % 2).astype(np.uint8)

    def observables_of(self, errors: np.ndarray) -> np.ndarray:
        return (np.asarray(errors, dtype=np.int64) @ self.L.T.astype(np.int64) % 2).astype(np.uint8)

    def check_syndromes(self, syndromes) -> np.ndarray:
        syndromes = np.asarray(syndromes, dtype=np.uint8)
        if syndromes.shape[-1] != self.num_checks:
            raise ValueError(
                f"syndrome length must be num_detectors={self.num_checks}, "
                f"got {syndromes.shape[-1]}."
            )
        return syndromes


@dataclass(frozen=True, eq=False)
class BpResult:
    """Outcome of belief propagation on one syndrome.

    ``hard_decision`` reproduces the syndrome whenever ``converged``.
    """
    converged: bool
    iterations_used: int
    hard_decision: np.ndarray
    marginals: np.ndarray


@dataclass(frozen=True, eq=False)
class Correction:
    """A proposed set of fired mechanisms and its effect on the observables."""
    mechanisms_flagged: np.ndarray
    observable_flips: np.ndarray
    valid: bool


class SecondLevelDecoder:
    """Base class for decoders run on syndromes the predecoder could not resolve."""

    def __init__(self, graph: TannerGraph):
        self.graph = graph

    def decode(self, syndromes):
        """Decode a batch of syndromes.

        Parameters
        ----------
        syndromes : array-like, shape [batch_size, num_detectors]

        Returns
        -------
        results : list, length batch_size
        """
        raise NotImplementedError

    def correction(self, syndrome: np.ndarray, errors: np.ndarray) -> Correction:
        errors = np.asarray(errors, dtype=np.uint8)
        valid = bool(np.array_equal(self.graph.syndrome_of(errors), syndrome))
        return Correction(errors, self.graph.observables_of(errors), valid)


class MinSumBP(SecondLevelDecoder):
    """Scaled min-sum belief propagation with a flooding schedule.

    Messages live on Tanner-graph edges and a whole batch is updated at once with
    scatter reductions. A row stops changing once its hard decision reproduces its
    syndrome and is unchanged from the previous iteration, the decision of the
    priors standing in before the first.

    Parameters
    ----------
    graph : TannerGraph
    max_iters : int, default=50
        Iteration budget.
    scaling : float, default=0.9
        Factor applied to check-to-variable messages.
    """

    def __init__(self, graph: TannerGraph, max_iters: int = 50, scaling: float = MIN_SUM_SCALING):
        super().__init__(graph)
        if max_iters < 1:
            raise ValueError(f"`max_iters` must be >= 1, got {max_iters}.")
        self.max_iters = max_iters
        self.scaling = scaling

    def decode(self, syndromes) -> List[BpResult]:
        converged, iterations, hard, posterior = self.decode_batch(syndromes)
        return [
            BpResult(bool(converged[b]), int(iterations[b]), hard[b], posterior[b])
            for b in range(hard.shape[0])
        ]

    def decode_batch(self, syndromes) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Array form of :meth:`decode`.

        Returns
        -------
        converged : ndarray, shape [batch_size], dtype bool
        iterations : ndarray, shape [batch_size], dtype int64
        hard_decision : ndarray, shape [batch_size, num_mechanisms], dtype uint8
        marginals : ndarray, shape [batch_size, num_mechanisms], dtype float64
        """
        syndromes = self.graph.check_syndromes(syndromes)
        if syndromes.ndim != 2:
            raise ValueError(f"`syndromes` shape must be (batch_size, num_detectors), "
                             f"got {syndromes.shape}.")
        B, m, n = syndromes.shape[0], self.graph.num_checks, self.graph.num_variables
        checks, variables = self.graph.edge_checks, self.graph.edge_variables
        E = checks.shape[0]
        prior = torch.from_numpy(self.graph.priors)  # [n]
        s = torch.from_numpy(syndromes.astype(np.int64))  # [B, m]
        edge_index = checks.reshape(1, E).expand(B, E)  # [B, E]

        converged = torch.zeros(B, dtype=torch.bool)
        iterations = torch.full((B,), self.max_iters, dtype=torch.int64)
        hard_out = torch.zeros((B, n), dtype=torch.bool)
        posterior_out = prior.reshape(1, n).repeat(B, 1)

        v2c = prior[variables].reshape(1, E).repeat(B, 1)  # [B, E]
        previous = (prior < 0).reshape(1, n).repeat(B, 1)
        for iteration in range(1, self.max_iters + 1):
            magnitude = v2c.abs()
            negative = (v2c < 0).to(torch.int64)
            parity = torch.zeros((B, m), dtype=torch.int64).index_add_(1, checks, negative)
            parity = (parity + s) % 2  # [B, m]

            inf = torch.full((B, m), float("inf"), dtype=torch.float64)
            min1 = inf.scatter_reduce(1, edge_index, magnitude, reduce="amin")
            at_min = magnitude == min1.gather(1, edge_index)
            min_count = torch.zeros((B, m), dtype=torch.int64).index_add_(
                1, checks, at_min.to(torch.int64))
            masked = torch.where(at_min, torch.full_like(magnitude, float("inf")), magnitude)
            min2 = inf.scatter_reduce(1, edge_index, masked, reduce="amin")
            unique_min = at_min & (min_count.gather(1, edge_index) == 1)
            others = torch.where(unique_min, min2.gather(1, edge_index), min1.gather(1, edge_index))

            sign_bit = (parity.gather(1, edge_index) + negative) % 2  # excludes the edge itself
            sign = 1. - 2. * sign_bit.to(torch.float64)
            c2v = (self.scaling * sign * others).clamp(-LLR_CLAMP, LLR_CLAMP)  # [B, E]

            posterior = prior.reshape(1, n) + torch.zeros((B, n), dtype=torch.float64).index_add_(
                1, variables, c2v)
            hard = posterior < 0  # LLR 0 decodes to 0
            fired = hard[:, variables].to(torch.int64)
            reproduced = torch.zeros((B, m), dtype=torch.int64).index_add_(1, checks, fired) % 2
            satisfied = (reproduced == s).all(dim=1) & (hard == previous).all(dim=1)
            previous = hard

            active = ~converged
            update = active.reshape(B, 1)
            hard_out = torch.where(update, hard, hard_out)
            posterior_out = torch.where(update, posterior, posterior_out)
            newly = active & satisfied
            iterations[newly] = iteration
            converged |= newly
            if bool(converged.all()):
                break
            v2c = posterior[:, variables] - c2v

        return (converged.numpy(), iterations.numpy(),
                hard_out.numpy().astype(np.uint8), posterior_out.numpy())


class OrderedStatistics(SecondLevelDecoder):
    """Order-0 ordered statistics decoding.

    Mechanisms are sorted by ascending posterior LLR (most likely first, stable);
    Gaussian elimination over GF(2) in that column order picks the information set,
    and the syndrome is solved on it.
    """

    def decode(self, syndromes, marginals=None) -> List[Correction]:
        syndromes = self.graph.check_syndromes(syndromes)
        if marginals is None:
            marginals = np.broadcast_to(self.graph.priors, (syndromes.shape[0],
                                                             self.graph.num_variables))
        return [self.postprocess(s, llr) for s, llr in zip(syndromes, marginals)]

    def postprocess(self, syndrome: np.ndarray, marginals: np.ndarray) -> Correction:
        syndrome = self.graph.check_syndromes(syndrome)
        order = np.argsort(np.asarray(marginals, dtype=np.float64), kind="stable")
        solution = gf2_solve(self.graph.H[:, order], syndrome)
        errors = np.zeros(self.graph.num_variables, dtype=np.uint8)
        if solution is not None:
            errors[order] = solution
        return self.correction(syndrome, errors)


def gf2_solve(H: np.ndarray, s: np.ndarray):
    """Solve ``H e = s`` over GF(2), supported on the pivot columns.

    Returns None when ``s`` is outside the column space of ``H``.
    """
    m, n = H.shape
    A = H.astype(np.uint8).copy()
    b = np.asarray(s, dtype=np.uint8).copy()
    pivots = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        candidates = np.flatnonzero(A[row:, col])
        if candidates.size == 0:
            continue
        pivot_row = row + candidates[0]
        if pivot_row != row:
            A[[row, pivot_row]] = A[[pivot_row, row]]
            b[[row, pivot_row]] = b[[pivot_row, row]]
        eliminate = A[:, col].astype(bool)
        eliminate[row] = False
        A[eliminate] ^= A[row]
        b[eliminate] ^= b[row]
        pivots.append(col)
        row += 1
    if b[row:].any():
        return None
    e = np.zeros(n, dtype=np.uint8)
    for r, col in enumerate(pivots):
        e[col] = b[r]
    return e


class BPOSD(SecondLevelDecoder):
    """Belief propagation, falling back to OSD-0 on the final marginals.

    Parameters
    ----------
    graph : TannerGraph
    max_iters : int, default=50
    """

    def __init__(self, graph: TannerGraph, max_iters: int = 50):
        super().__init__(graph)
        self.bp = MinSumBP(graph, max_iters)
        self.osd = OrderedStatistics(graph)

    def decode(self, syndromes) -> List[Tuple[Correction, bool]]:
        """Decode a batch; each result is ``(correction, used_osd)``."""
        syndromes = self.graph.check_syndromes(syndromes)
        converged, _, hard, marginals = self.bp.decode_batch(syndromes)
        return [self._resolve(syndromes[b], converged[b], hard[b], marginals[b])
                for b in range(syndromes.shape[0])]

    def decode_with_bp(self, syndromes, bp_batch):
        """Like :meth:`decode`, reusing an existing :meth:`MinSumBP.decode_batch` result."""
        converged, _, hard, marginals = bp_batch
        return [self._resolve(syndromes[b], converged[b], hard[b], marginals[b])
                for b in range(len(syndromes))]

    def _resolve(self, syndrome, converged, hard, marginals):
        if converged:
            return self.correction(syndrome, hard), False
        return self.osd.postprocess(syndrome, marginals), True


class MaximumLikelihood(SecondLevelDecoder):
    """Exhaustive search for the most probable mechanism subset.

    Limited to 24 mechanisms; subsets are enumerated in chunks. Log-probabilities
    within 1e-9 count as equal, and the lexicographically smallest flagged index
    tuple wins a tie.
    """

    chunk_bits = 16

    def __init__(self, graph: TannerGraph):
        super().__init__(graph)
        if graph.num_variables > MLE_MAX_MECHANISMS:
            raise ValueError(
                f"maximum-likelihood search is limited to {MLE_MAX_MECHANISMS} mechanisms, "
                f"got {graph.num_variables}."
            )
        p = np.clip(graph.probabilities, 1e-300, 1. - 1e-16)
        self._flip_weight = np.log(p) - np.log1p(-p)  # [n]

    def decode(self, syndromes) -> List[Correction]:
        syndromes = self.graph.check_syndromes(syndromes)
        return [self._decode_one(s) for s in syndromes]

    def _decode_one(self, syndrome: np.ndarray) -> Correction:
        n = self.graph.num_variables
        chunk = 1 << min(n, self.chunk_bits)
        best_score = -np.inf
        best: List[np.ndarray] = []
        for start in range(0, 1 << n, chunk):
            codes = np.arange(start, start + chunk, dtype=np.int64)
            subsets = ((codes[:, None] >> np.arange(n)) & 1).astype(np.uint8)  # [chunk, n]
            matching = subsets[(self.graph.syndrome_of(subsets) == syndrome).all(axis=1)]
            if matching.shape[0] == 0:
                continue
            scores = matching @ self._flip_weight
            top = scores.max()
            if top > best_score + MLE_TIE_TOLERANCE:
                best_score, best = top, []
            elif top < best_score - MLE_TIE_TOLERANCE:
                continue
            best_score = max(best_score, top)
            best.extend(matching[scores >= best_score - MLE_TIE_TOLERANCE])
        if not best:
            return self.correction(syndrome, np.zeros(n, dtype=np.uint8))
        winner = min(best, key=lambda e: tuple(np.flatnonzero(e)))
        return self.correction(syndrome, winner)


def bp_decode(graph: TannerGraph, syndrome, max_iters: int = 50) -> BpResult:
    """Run min-sum belief propagation on one syndrome."""
    return MinSumBP(graph, max_iters).decode(np.asarray(syndrome).reshape(1, -1))[0]


def osd0_postprocess(graph: TannerGraph, syndrome, marginals) -> Correction:
    """Run OSD-0 on one syndrome with the given posterior LLRs."""
    return OrderedStatistics(graph).postprocess(np.asarray(syndrome), np.asarray(marginals))


def bposd_decode(graph: TannerGraph, syndrome, max_iters: int = 50) -> Tuple[Correction, bool]:
    """BP, then OSD-0 when BP does not converge; returns ``(correction, used_osd)``."""
    return BPOSD(graph, max_iters).decode(np.asarray(syndrome).reshape(1, -1))[0]


def mle_brute_force(dem: DetectorErrorModel, syndrome) -> Correction:
    """Most probable mechanism subset reproducing ``syndrome``.

    Raises
    ------
    ValueError
        If the model has more than 24 mechanisms.
    """
    graph = TannerGraph.from_dem(dem)
    return MaximumLikelihood(graph).decode(np.asarray(syndrome).reshape(1, -1))[0]
