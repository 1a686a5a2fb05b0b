import unittest

import numpy as np

from qpredec.decoders import (
    BPOSD,
    MaximumLikelihood,
    MinSumBP,
    OrderedStatistics,
    TannerGraph,
    bp_decode,
    bposd_decode,
    gf2_solve,
    mle_brute_force,
    osd0_postprocess,
)
from qpredec.dem import NoiseConfig, build_phenomenological_dem, merge_duplicates
from qpredec.simulation import MechanismSampler
from tests.testing_utilities import TestCase
from tests.dem.common import REPETITION, REPETITION_DEM, STEANE, STEANE_DEM

# Three mechanisms on a two-check chain: {D0} flipping L0, {D0, D1}, {D1}.
CHAIN_DEM = merge_duplicates(build_phenomenological_dem(REPETITION, "Z", NoiseConfig(p_data=0.01)))
CHAIN = TannerGraph.from_dem(CHAIN_DEM)
# Code-capacity Steane: mechanism q is a flip of qubit q, qubit 6 touching all three checks.
STEANE_CAPACITY = TannerGraph.from_dem(
    build_phenomenological_dem(STEANE, "Z", NoiseConfig(p_data=1e-3)))


def _graph(H, probabilities):
    H = np.asarray(H)
    return TannerGraph(H, np.zeros((1, H.shape[1])), probabilities)


class TestTannerGraph(TestCase):
    def test_chain_structure(self):
        self.assertBitsEqual(CHAIN.H, [[1, 1, 0], [0, 1, 1]])
        self.assertBitsEqual(CHAIN.L, [[1, 0, 0]])
        self.assertAllClose(CHAIN.priors, np.full(3, np.log(99.)))

    def test_mismatched_shapes(self):
        with self.assertRaises(ValueError):
            TannerGraph(np.ones((2, 3)), np.ones((1, 2)), np.full(3, 0.1))

    def test_syndrome_length_checked(self):
        with self.assertRaises(ValueError):
            bp_decode(CHAIN, [1, 0, 0])


class TestMinSumBP(TestCase):
    def test_zero_syndrome(self):
        result = bp_decode(CHAIN, [0, 0])
        self.assertTrue(result.converged)
        self.assertEqual(result.iterations_used, 1)
        self.assertBitsEqual(result.hard_decision, [0, 0, 0])

    def test_bulk_error(self):
        result = bp_decode(CHAIN, [1, 1])
        self.assertTrue(result.converged)
        self.assertEqual(result.iterations_used, 2)
        self.assertBitsEqual(result.hard_decision, [0, 1, 0])

    def test_boundary_error(self):
        result = bp_decode(CHAIN, [1, 0])
        self.assertTrue(result.converged)
        self.assertEqual(result.iterations_used, 3)
        self.assertBitsEqual(result.hard_decision, [1, 0, 0])
        self.assertBitsEqual(CHAIN.observables_of(result.hard_decision), [1])

    def test_budget_exhausted(self):
        result = bp_decode(CHAIN, [1, 0], max_iters=1)
        self.assertFalse(result.converged)
        self.assertEqual(result.iterations_used, 1)

    def test_symmetric_pair_never_converges(self):
        result = bp_decode(_graph([[1, 1]], [0.1, 0.1]), [1], max_iters=20)
        self.assertFalse(result.converged)
        self.assertEqual(result.iterations_used, 20)
        self.assertAllClose(result.marginals[0], result.marginals[1])

    def test_batch_matches_single(self):
        syndromes = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=np.uint8)
        converged, iterations, hard, _ = MinSumBP(CHAIN).decode_batch(syndromes)
        for b, syndrome in enumerate(syndromes):
            single = bp_decode(CHAIN, syndrome)
            self.assertEqual(bool(converged[b]), single.converged)
            self.assertEqual(int(iterations[b]), single.iterations_used)
            self.assertBitsEqual(hard[b], single.hard_decision)

    def test_converged_reproduces_syndrome(self):
        graph = TannerGraph.from_dem(merge_duplicates(STEANE_DEM))
        syndromes = graph.H.T.copy()
        for result, syndrome in zip(MinSumBP(graph).decode(syndromes), syndromes):
            if result.converged:
                self.assertBitsEqual(graph.syndrome_of(result.hard_decision), syndrome)

    def test_passing_decision_not_accepted(self):
        # The first flood reproduces the syndrome with {2, 4, 5, 6}, then oscillates.
        result = bp_decode(STEANE_CAPACITY, [1, 1, 1])
        self.assertTrue(result.converged)
        self.assertEqual(result.iterations_used, 6)
        self.assertBitsEqual(result.hard_decision, [0, 0, 0, 0, 0, 0, 1])

    def test_invalid_budget(self):
        with self.assertRaises(ValueError):
            MinSumBP(CHAIN, max_iters=0)

    def test_batch_shape(self):
        with self.assertRaises(ValueError):
            MinSumBP(CHAIN).decode_batch(np.zeros(2, dtype=np.uint8))


class TestOrderedStatistics(TestCase):
    def test_gf2_solve(self):
        H = np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8)
        e = gf2_solve(H, np.array([1, 0], dtype=np.uint8))
        self.assertBitsEqual(H @ e % 2, [1, 0])
        self.assertIsNone(gf2_solve(np.array([[1, 0], [1, 0]], dtype=np.uint8),
                                    np.array([1, 0], dtype=np.uint8)))

    def test_ties_prefer_lower_index(self):
        graph = _graph([[1, 1]], [0.1, 0.1])
        correction = osd0_postprocess(graph, [1], np.zeros(2))
        self.assertTrue(correction.valid)
        self.assertBitsEqual(correction.mechanisms_flagged, [1, 0])

    def test_most_likely_column_first(self):
        graph = _graph([[1, 1]], [0.1, 0.1])
        correction = osd0_postprocess(graph, [1], np.array([2., -1.]))
        self.assertBitsEqual(correction.mechanisms_flagged, [0, 1])

    def test_unreachable_syndrome(self):
        graph = _graph([[1, 0], [1, 0]], [0.1, 0.1])
        correction = osd0_postprocess(graph, [1, 0], np.zeros(2))
        self.assertFalse(correction.valid)

    def test_sampled_syndromes_valid(self):
        noisy_steane = build_phenomenological_dem(
            STEANE, "Z", NoiseConfig(p_data=0.02, p_meas=0.01, rounds=3))
        for name, dem in (("repetition", REPETITION_DEM), ("steane", noisy_steane)):
            dem = merge_duplicates(dem)
            _, syndromes, _ = MechanismSampler.from_dem(dem).sample(7, 0, 10000)
            corrections = OrderedStatistics(TannerGraph.from_dem(dem)).decode(syndromes)
            with self.subTest(code=name):
                self.assertTrue(syndromes.any())
                self.assertTrue(all(correction.valid for correction in corrections))


class TestBPOSD(TestCase):
    def test_converged_skips_osd(self):
        correction, used_osd = bposd_decode(CHAIN, [1, 1])
        self.assertFalse(used_osd)
        self.assertTrue(correction.valid)
        self.assertBitsEqual(correction.mechanisms_flagged, [0, 1, 0])

    def test_fallback(self):
        correction, used_osd = bposd_decode(_graph([[1, 1]], [0.1, 0.1]), [1], max_iters=10)
        self.assertTrue(used_osd)
        self.assertTrue(correction.valid)
        self.assertBitsEqual(correction.mechanisms_flagged, [1, 0])

    def test_single_mechanism_syndromes(self):
        for name, dem in (("repetition", REPETITION_DEM), ("steane", STEANE_DEM)):
            graph = TannerGraph.from_dem(merge_duplicates(dem))
            for j, (correction, _) in enumerate(BPOSD(graph).decode(graph.H.T.copy())):
                with self.subTest(code=name, mechanism=j):
                    self.assertTrue(correction.valid)
                    self.assertBitsEqual(correction.observable_flips, graph.L[:, j])

    def test_budget_fallback_on_steane(self):
        correction, used_osd = bposd_decode(STEANE_CAPACITY, [1, 1, 1], max_iters=4)
        self.assertTrue(used_osd)
        self.assertBitsEqual(correction.mechanisms_flagged, [0, 0, 0, 0, 0, 0, 1])
        self.assertBitsEqual(correction.observable_flips, [0])

    def test_reuses_bp_result(self):
        decoder = BPOSD(CHAIN)
        syndromes = np.array([[1, 0], [1, 1]], dtype=np.uint8)
        reused = decoder.decode_with_bp(syndromes, decoder.bp.decode_batch(syndromes))
        for (a, osd_a), (b, osd_b) in zip(reused, decoder.decode(syndromes)):
            self.assertEqual(osd_a, osd_b)
            self.assertBitsEqual(a.mechanisms_flagged, b.mechanisms_flagged)


class TestMaximumLikelihood(TestCase):
    def test_prefers_likelier_mechanism(self):
        graph = TannerGraph(np.array([[1, 1]]), np.array([[0, 1]]), [0.1, 0.2])
        correction = MaximumLikelihood(graph).decode([[1]])[0]
        self.assertBitsEqual(correction.mechanisms_flagged, [0, 1])
        self.assertBitsEqual(correction.observable_flips, [1])

    def test_tie_break(self):
        correction = MaximumLikelihood(_graph([[1, 1]], [0.1, 0.1])).decode([[1]])[0]
        self.assertBitsEqual(correction.mechanisms_flagged, [1, 0])

    def test_bp_agrees_on_chain(self):
        for syndrome in ([1, 0], [0, 1], [1, 1]):
            expected = mle_brute_force(CHAIN_DEM, syndrome)
            result = bp_decode(CHAIN, syndrome, max_iters=3)
            self.assertTrue(result.converged)
            self.assertBitsEqual(result.hard_decision, expected.mechanisms_flagged)

    def test_mechanism_limit(self):
        with self.assertRaises(ValueError):
            mle_brute_force(STEANE_DEM, np.zeros(STEANE_DEM.num_detectors, dtype=np.uint8))


if __name__ == "__main__":
    unittest.main()
